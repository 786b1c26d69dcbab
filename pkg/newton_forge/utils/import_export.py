import json
import logging
from pathlib import Path

import pandas as pd

from newton_forge.models.circuit import PolytopeCircuit
from newton_forge.models.cpwl_fn import AffineMax, CpwlFn
from newton_forge.models.network import ReluNetwork
from newton_forge.models.polytope import DecompositionPart, Polytope
from newton_forge.utils.errors import InputFormatError

logger = logging.getLogger(__name__)


def dumps(data):
    """
    Canonical JSON text: sorted keys, two-space indent, trailing newline.

    Args:
        data (dict or list): JSON-ready data.

    Returns:
        str: JSON string.
    """
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def export_json(obj, path=None):
    """
    Serialize an artifact (anything with to_dict, or plain JSON data).

    Args:
        obj: Artifact or data.
        path (str, optional): Target file; the text is only returned when None.

    Returns:
        str: JSON string.
    """
    data = obj.to_dict() if hasattr(obj, 'to_dict') else obj
    text = dumps(data)
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
        logger.debug("wrote %s", path)
    return text


def load_json(source):
    """
    Parse JSON from a file path or a JSON string.

    Raises:
        InputFormatError: For unreadable files and invalid JSON.
    """
    try:
        if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(('{', '['))):
            text = Path(source).read_text(encoding='utf-8')
        else:
            text = source
        return json.loads(text)
    except OSError as exc:
        raise InputFormatError(f"cannot read {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc}") from exc


def import_network(source):
    return ReluNetwork.from_dict(load_json(source))


def import_circuit(source):
    return PolytopeCircuit.from_dict(load_json(source))


def import_polytope(source):
    return Polytope.from_dict(load_json(source))


def import_function(source):
    """
    A CPWL function: CpwlFn when all biases vanish, AffineMax otherwise.
    """
    data = load_json(source)
    if not isinstance(data, dict):
        raise InputFormatError("a function file holds a JSON object")
    biases = data.get('biases') or []
    if any(str(b).strip() not in ('0', '0/1') for b in biases):
        return AffineMax.from_dict(data)
    return CpwlFn.from_dict(data)


def export_parts(parts, path=None):
    """Decomposition parts as a JSON list."""
    return export_json([part.to_dict() for part in parts], path)


def import_parts(source):
    data = load_json(source)
    if not isinstance(data, list):
        raise InputFormatError("a decomposition file holds a JSON list of parts")
    return [DecompositionPart.from_dict(item) for item in data]


def report_frame(report, digits=12):
    """
    Tabulate a RunReport's checks.

    Returns:
        pandas.DataFrame: One row per check, canonical order.
    """
    columns = ['suite', 'fixture', 'check', 'passed', 'exact', 'decimal']
    return pd.DataFrame(report.rows(digits), columns=columns)


def export_report_csv(report, path=None, digits=12):
    """
    Export a report's checks as CSV.

    Returns:
        str: CSV text (also written to path when given).
    """
    text = report_frame(report, digits).to_csv(index=False)
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')
    return text


def export_report_xlsx(report, path, digits=12):
    """
    Write a report to an Excel workbook: a Checks sheet and a Summary sheet.

    Args:
        report (RunReport): Report.
        path (str): Target .xlsx file.
    """
    frame = report_frame(report, digits)
    summary = (frame.groupby('suite')['passed'].agg(['count', 'sum'])
               .rename(columns={'count': 'checks', 'sum': 'passed'})
               .reset_index())
    with pd.ExcelWriter(path, engine='xlsxwriter') as writer:
        frame.to_excel(writer, sheet_name='Checks', index=False)
        summary.to_excel(writer, sheet_name='Summary', index=False)
        worksheet = writer.sheets['Checks']
        worksheet.set_column(0, 2, 24)
        worksheet.set_column(4, 5, 20)
    logger.debug("wrote %s", path)
