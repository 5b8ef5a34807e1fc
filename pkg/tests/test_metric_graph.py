import math
import random
from fractions import Fraction

import pytest

import oracles
from buildctl.angles import Angle
from buildctl.complexes import MetricComplex
from buildctl.corpus import gen_k4, gen_petersen
from buildctl.metric_graph import Circle, GraphPoint, MetricGraph


def cycle_graph(n, length):
    return MetricGraph([f"v{i}" for i in range(n)],
                       [(i, (i + 1) % n, length) for i in range(n)])


def graph_of(c: MetricComplex) -> MetricGraph:
    return MetricGraph.from_complex(c)


def random_graph(rng: random.Random, max_v=10, max_e=14) -> MetricGraph:
    n = rng.randint(2, max_v)
    lengths = [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)]
    edges = []
    for v in range(1, n):
        u = rng.randrange(v)
        edges.append((u, v, rng.choice(lengths)))
    extra = rng.randint(0, max_e - len(edges))
    for _ in range(extra):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        edges.append((u, v, rng.choice(lengths)))
    return MetricGraph([f"v{i}" for i in range(n)], edges)


def test_c4_opposite_vertices():
    g = cycle_graph(4, Fraction(1, 2))
    assert g.distance(GraphPoint(vertex=0), GraphPoint(vertex=2)) == Fraction(1)


def test_heawood_distance_three_steps(heawood):
    g = graph_of(heawood)
    # p0 and l1 are at combinatorial distance 3 (l1 = {1,2,4} misses p0)
    i = heawood.vertices.index("p0")
    j = heawood.vertices.index("l1")
    assert g.distance(GraphPoint(vertex=i), GraphPoint(vertex=j)) == Fraction(1)


def test_k33_parallel_midpoints(k33):
    g = graph_of(k33)
    e1 = next(k for k, (u, v, _) in enumerate(g.edges)
              if {g.vertices[u], g.vertices[v]} == {"a0", "b0"})
    e2 = next(k for k, (u, v, _) in enumerate(g.edges)
              if {g.vertices[u], g.vertices[v]} == {"a1", "b1"})
    p = g.point(e1, Fraction(1, 4))
    q = g.point(e2, Fraction(1, 4))
    d = g.distance(p, q)
    assert d == Fraction(1)
    edges = [(u, v, float(ln)) for u, v, ln in g.edges]
    oracle = oracles.point_distance_oracle(6, edges, (e1, 0.25), (e2, 0.25))
    assert abs(float(d) - oracle) * math.pi <= 1e-9


def test_heawood_diameter_exactly_pi(heawood):
    g = graph_of(heawood)
    d, wit = g.diameter()
    assert d == Fraction(1)
    assert wit is not None
    assert g.distance(wit[0], wit[1]) == Fraction(1)


def test_k4_diameter_matches_oracle():
    g = graph_of(gen_k4())
    d, wit = g.diameter()
    assert d == Fraction(4, 3)
    oracle = oracles.sampling_diameter(4, [(u, v, float(ln)) for u, v, ln in g.edges])
    assert abs(float(d) - oracle) <= 1e-6


def test_circle_diameter():
    g = cycle_graph(6, Fraction(1, 3))
    d, _ = g.diameter()
    assert d == Fraction(1)


def test_single_edge_diameter():
    g = MetricGraph(["a", "b"], [(0, 1, Fraction(1, 3))])
    d, wit = g.diameter()
    assert d == Fraction(1, 3)


def test_disconnected_diameter_infinite():
    g = MetricGraph(["a", "b", "c", "d"],
                    [(0, 1, Fraction(1, 2)), (2, 3, Fraction(1, 2))])
    d, _ = g.diameter()
    assert d == math.inf


def test_heawood_systole_2pi(heawood):
    g = graph_of(heawood)
    s, cyc = g.systole()
    assert s == Fraction(2)
    assert oracles.exhaustive_systole(14, list(g.edges)) == Fraction(2)


def test_petersen_systole():
    g = graph_of(gen_petersen())
    s, cyc = g.systole()
    assert s == Fraction(5, 3)
    assert len(cyc) == 5
    assert oracles.exhaustive_systole(10, list(g.edges)) == Fraction(5, 3)


def test_tree_systole_infinite():
    g = MetricGraph(["a", "b", "c"], [(0, 1, Fraction(1, 2)), (1, 2, Fraction(1, 2))])
    s, cyc = g.systole()
    assert s == math.inf and cyc is None
    assert g.cat1() == (True, None)


def test_cat1_verdicts(k33):
    assert graph_of(k33).cat1()[0] is True
    ok, cyc = graph_of(gen_petersen()).cat1()
    assert ok is False and len(cyc) == 5
    assert cycle_graph(8, Fraction(1, 4)).cat1()[0] is True


def test_circle_antipode_single_point():
    g = cycle_graph(6, Fraction(1, 3))
    ant = g.antipode_set(GraphPoint(vertex=0))
    assert ant.nonempty and ant.discrete
    assert len(ant.points) == 1
    assert ant.points[0] == GraphPoint(vertex=3)


def test_heawood_vertex_antipodes_match_sampling(heawood):
    g = graph_of(heawood)
    ant = g.antipode_set(GraphPoint(vertex=0))
    assert ant.nonempty and ant.discrete
    # exactly the vertices at combinatorial distance 3
    dist = g.vertex_distances(0)
    expect = {v for v, d in dist.items() if d == Fraction(1)}
    got = {p.vertex for p in ant.points}
    assert got == expect and len(got) == 4
    # sampled membership: no interior grid point reaches distance >= pi
    for eid in range(len(g.edges)):
        ln = g.edges[eid][2]
        for k in range(1, 8):
            p = g.point(eid, Fraction(k, 8) * ln)
            if p.is_vertex:
                continue
            assert g.distance(GraphPoint(vertex=0), p) < Fraction(1)


def test_petersen_vertex_antipodes_empty():
    g = graph_of(gen_petersen())
    for v in range(10):
        ant = g.antipode_set(GraphPoint(vertex=v))
        assert not ant.nonempty


def test_petersen_diameter_is_pi_at_edge_midpoints():
    # the vertex eccentricities stay below pi, but disjoint-edge midpoints reach it
    g = graph_of(gen_petersen())
    d, wit = g.diameter()
    assert d == Fraction(1)
    assert wit is not None and not wit[0].is_vertex and not wit[1].is_vertex


def test_fat_antipode_interval_detected():
    # two vertices joined by two paths of length 3*pi/2: lots of antipodes
    g = MetricGraph(["a", "m1", "b", "m2"],
                    [(0, 1, Fraction(3, 4)), (1, 2, Fraction(3, 4)),
                     (2, 3, Fraction(3, 4)), (3, 0, Fraction(3, 4))])
    ant = g.antipode_set(GraphPoint(vertex=0))
    assert ant.nonempty and not ant.discrete
    assert ant.intervals


def test_antipode_discreteness_iff_edge_max_below_pi():
    rng = random.Random(7)
    for _ in range(40):
        g = random_graph(rng)
        if not g.is_connected():
            continue
        p = GraphPoint(vertex=rng.randrange(len(g.vertices)))
        ant = g.antipode_set(p)
        has_fat = any(g.edge_max_distance(p, e) > Fraction(1)
                      for e in range(len(g.edges)))
        assert (not ant.discrete) == has_fat


def test_suppress_path_subdivision():
    g = MetricGraph(["a", "m", "b"], [(0, 1, Fraction(1, 4)), (1, 2, Fraction(1, 4))])
    out = g.suppress_degree2()
    assert isinstance(out, MetricGraph)
    assert out.vertices == ("a", "b")
    assert out.edges == ((0, 1, Fraction(1, 2)),)


def test_suppress_circle_special_value():
    out = cycle_graph(6, Fraction(1, 3)).suppress_degree2()
    assert isinstance(out, Circle)
    assert out.circumference == Fraction(2)


def test_suppress_trivalent_unchanged(heawood):
    g = graph_of(heawood)
    out = g.suppress_degree2()
    assert isinstance(out, MetricGraph)
    assert len(out.vertices) == 14 and len(out.edges) == 21


def test_suppress_balloon_keeps_one_vertex():
    # a loop of two edges hung off a path: suppression must not build a self-loop
    g = MetricGraph(["x", "u", "w"],
                    [(0, 1, Fraction(1, 2)), (1, 2, Fraction(1, 2)),
                     (1, 2, Fraction(1, 2))])
    out = g.suppress_degree2()
    assert isinstance(out, MetricGraph)
    assert all(u != v for u, v, _ in out.edges)


def test_suppress_preserves_distances():
    rng = random.Random(3)
    for _ in range(25):
        g = random_graph(rng)
        if not g.is_connected():
            continue
        out = g.suppress_degree2()
        if isinstance(out, Circle):
            continue
        name_old = {nm: i for i, nm in enumerate(g.vertices)}
        name_new = {nm: i for i, nm in enumerate(out.vertices)}
        common = sorted(set(g.vertices) & set(out.vertices))
        for _ in range(10):
            a, b = rng.choice(common), rng.choice(common)
            d1 = g.distance(GraphPoint(vertex=name_old[a]), GraphPoint(vertex=name_old[b]))
            d2 = out.distance(GraphPoint(vertex=name_new[a]), GraphPoint(vertex=name_new[b]))
            assert d1 == d2


def test_point_canonicalization():
    g = MetricGraph(["a", "b"], [(0, 1, Fraction(1, 2))])
    assert g.point(0, Fraction(0)).is_vertex
    assert g.point(0, Fraction(1, 2)).is_vertex
    assert not g.point(0, Fraction(1, 4)).is_vertex
    with pytest.raises(ValueError):
        g.point(0, Fraction(2, 3))


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        MetricGraph(["a"], [(0, 0, Fraction(1, 2))])


def test_metric_properties_random_sweep():
    # symmetry and triangle inequality on random point triples
    rng = random.Random(11)
    checked = 0
    while checked < 400:
        g = random_graph(rng)
        if not g.is_connected() or not g.edges:
            continue
        pts = []
        for _ in range(3):
            eid = rng.randrange(len(g.edges))
            ln = g.edges[eid][2]
            pts.append(g.point(eid, Fraction(rng.randint(0, 8), 8) * ln))
        a, b, c = pts
        dab = g.distance(a, b)
        assert dab == g.distance(b, a)
        assert g.distance(a, c) <= dab + g.distance(b, c) + Fraction(1, 10 ** 12)
        checked += 1
