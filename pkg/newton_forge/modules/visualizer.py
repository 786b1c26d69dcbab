import logging
from fractions import Fraction

import plotly.graph_objects as go

from newton_forge.modules import cpwl
from newton_forge.utils.config import load_config
from newton_forge.utils.rational import format_rational, parse_rational

logger = logging.getLogger(__name__)


class Visualizer:
    """
    Static figures for lattice balls, coloring games, polygon decompositions
    and linear regions of planar functions.
    """

    @staticmethod
    def settings():
        """Visualization section of the configuration."""
        return load_config()['visualization']

    @staticmethod
    def _layout(fig, title, settings=None):
        settings = settings or Visualizer.settings()
        fig.update_layout(
            title=title,
            width=settings.get('width', 640),
            height=settings.get('height', 640),
            plot_bgcolor='white',
            paper_bgcolor='white',
            showlegend=True,
            legend=dict(
                orientation="h",
                yanchor="bottom",
                y=1.02,
                xanchor="right",
                x=1
            ),
            margin=dict(l=40, r=20, t=60, b=40)
        )
        fig.update_xaxes(showgrid=False, zeroline=False)
        fig.update_yaxes(showgrid=False, zeroline=False, scaleanchor='x', scaleratio=1)
        return fig

    @staticmethod
    def _ball_points(ball, slope):
        return {v: tuple(float(c) for c in ball.plane_point(v, slope)) for v in ball.vertices}

    @staticmethod
    def _edge_trace(ball, points, color):
        x_data, y_data = [], []
        for u, v in ball.edges:
            x_data += [points[u][0], points[v][0], None]
            y_data += [points[u][1], points[v][1], None]
        return go.Scatter(
            x=x_data,
            y=y_data,
            mode='lines',
            line=dict(color=color, width=1),
            hoverinfo='skip',
            name='edges'
        )

    @staticmethod
    def create_ball_figure(ball, white=(), selected=(), slope=None, title=None):
        """
        Draw B_r with its black and white vertices.

        Args:
            ball (LatticeBall): Ball.
            white (iterable, optional): White (deleted) vertices.
            selected (iterable, optional): Vertices selected by a strategy.
            slope (Fraction, optional): Embedding slope; defaults to the first configured one.
            title (str, optional): Figure title.

        Returns:
            plotly.graph_objects.Figure: The figure.
        """
        settings = Visualizer.settings()
        colors = settings['colors']
        slope = parse_rational(slope or load_config()['lattice']['embedding_slopes'][0])
        points = Visualizer._ball_points(ball, slope)
        white, selected = set(white), set(selected)

        fig = go.Figure()
        fig.add_trace(Visualizer._edge_trace(ball, points, colors['edge']))
        groups = [
            ('black', [v for v in ball.vertices if v not in white and v not in selected], colors['black']),
            ('white', [v for v in ball.vertices if v in white and v not in selected], colors['white']),
            ('selected', sorted(selected), colors['selected']),
        ]
        for name, vertices, color in groups:
            if not vertices:
                continue
            fig.add_trace(go.Scatter(
                x=[points[v][0] for v in vertices],
                y=[points[v][1] for v in vertices],
                mode='markers',
                name=name,
                marker=dict(size=12, color=color, line=dict(color=colors['edge'], width=1)),
                text=[str(v) for v in vertices],
                hoverinfo='text'
            ))
        return Visualizer._layout(fig, title or f"B_{ball.r}", settings)

    @staticmethod
    def create_coloring_figure(ball, tree, slope=None):
        """
        Color each vertex by the selection that turned it white, in play order.

        Args:
            ball (LatticeBall): Ball.
            tree (GameTree): Played game.

        Returns:
            plotly.graph_objects.Figure: The figure.
        """
        settings = Visualizer.settings()
        palette = settings['part_colors']
        slope = parse_rational(slope or load_config()['lattice']['embedding_slopes'][0])
        points = Visualizer._ball_points(ball, slope)

        fig = go.Figure()
        fig.add_trace(Visualizer._edge_trace(ball, points, settings['colors']['edge']))
        colored = set()
        step = 0
        for node in tree.nodes():
            if node.is_leaf:
                continue
            step += 1
            covered = sorted(ball.closed_neighborhood([node.selected]) & set(node.region) - colored)
            colored.update(covered)
            color = palette[(step - 1) % len(palette)]
            fig.add_trace(go.Scatter(
                x=[points[v][0] for v in covered],
                y=[points[v][1] for v in covered],
                mode='markers',
                name=f"step {step}: {node.selected}",
                marker=dict(size=12, color=color,
                            symbol=['star' if v == node.selected else 'circle' for v in covered]),
                text=[str(v) for v in covered],
                hoverinfo='text'
            ))
        leftovers = [v for v in ball.vertices if v not in colored]
        if leftovers:
            fig.add_trace(go.Scatter(
                x=[points[v][0] for v in leftovers],
                y=[points[v][1] for v in leftovers],
                mode='markers',
                name='leaf vertices',
                marker=dict(size=12, color=settings['colors']['black'])
            ))
        return Visualizer._layout(fig, f"{tree.strategy} strategy on B_{ball.r}: cost {tree.cost}", settings)

    @staticmethod
    def _closed_ring(vertices):
        ring = [tuple(float(c) for c in v) for v in vertices]
        return ring + ring[:1]

    @staticmethod
    def create_decomposition_figure(polygon, parts):
        """
        The polygon and its Minkowski summands, each part placed at its lex-min vertex.

        Returns:
            plotly.graph_objects.Figure: The figure.
        """
        settings = Visualizer.settings()
        palette = settings['part_colors']
        fig = go.Figure()
        outline = Visualizer._closed_ring([polygon.vertices[i] for i in polygon.faces.two_faces[0]]
                                          if polygon.vertex_count > 2 else polygon.vertices)
        fig.add_trace(go.Scatter(
            x=[p[0] for p in outline],
            y=[p[1] for p in outline],
            mode='lines+markers',
            name='polygon',
            line=dict(color=settings['colors']['black'], width=2)
        ))
        for index, part in enumerate(parts):
            shape = part.polytope
            ring = [shape.vertices[i] for i in shape.faces.two_faces[0]] if shape.vertex_count > 2 else shape.vertices
            ring = Visualizer._closed_ring(ring)
            color = palette[index % len(palette)]
            fig.add_trace(go.Scatter(
                x=[p[0] for p in ring],
                y=[p[1] for p in ring],
                mode='lines',
                fill='toself' if part.shape == 'triangle' else None,
                name=f"{part.shape} {index + 1}",
                line=dict(color=color, width=2),
                opacity=0.6
            ))
        return Visualizer._layout(fig, f"{len(parts)} Minkowski summands", settings)

    @staticmethod
    def create_regions_figure(fn, box=cpwl.UNIT_BOX):
        """
        Linear regions of a planar CPWL function inside a box.

        Returns:
            plotly.graph_objects.Figure: One filled polygon per active piece.
        """
        settings = Visualizer.settings()
        palette = settings['part_colors']
        fig = go.Figure()
        for index, ((slope, bias), polygon) in enumerate(cpwl.linear_regions(fn, box)):
            ring = Visualizer._closed_ring(polygon)
            label = f"<({', '.join(format_rational(c) for c in slope)}), x>"
            if bias != Fraction(0):
                label += f" + {format_rational(bias)}"
            fig.add_trace(go.Scatter(
                x=[p[0] for p in ring],
                y=[p[1] for p in ring],
                mode='lines',
                fill='toself',
                name=label,
                line=dict(color=palette[index % len(palette)], width=1)
            ))
        return Visualizer._layout(fig, "Linear regions", settings)

    @staticmethod
    def save_svg(fig, path):
        """Write a static SVG (rendered by kaleido)."""
        fig.write_image(str(path), format='svg')
        logger.info("wrote %s", path)
        return path
