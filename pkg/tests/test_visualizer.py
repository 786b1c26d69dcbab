from newton_forge.models.cpwl_fn import CpwlFn
from newton_forge.modules import lattice_game as lg
from newton_forge.modules import synthesis
from newton_forge.modules.visualizer import Visualizer
from newton_forge.utils.import_export import import_polytope


def trace_names(fig):
    return [trace.name for trace in fig.data]


def test_ball_figure_groups_vertices():
    ball = lg.build_ball(2)
    fig = Visualizer.create_ball_figure(ball, white=[(1, 0)], selected=[(0, 0)])
    assert trace_names(fig) == ['edges', 'black', 'white', 'selected']
    assert len(fig.data[1].x) == ball.vertex_count - 2
    assert fig.layout.title.text == 'B_2'


def test_coloring_figure_covers_every_vertex():
    ball = lg.build_ball(2)
    tree = lg.play(ball, lg.separator_strategy(ball))
    fig = Visualizer.create_coloring_figure(ball, tree)
    drawn = sum(len(trace.x) for trace in fig.data[1:])
    assert drawn == ball.vertex_count
    assert 'cost' in fig.layout.title.text


def test_decomposition_figure(samples):
    hexagon = import_polytope(samples / 'hexagon.json')
    parts = synthesis.decompose_polygon(hexagon)
    fig = Visualizer.create_decomposition_figure(hexagon, parts)
    assert trace_names(fig)[0] == 'polygon'
    assert len(fig.data) == 1 + len(parts)


def test_regions_figure_of_max2():
    fig = Visualizer.create_regions_figure(CpwlFn.max_n(2))
    assert sorted(trace_names(fig)) == ['<(0, 1), x>', '<(1, 0), x>']
