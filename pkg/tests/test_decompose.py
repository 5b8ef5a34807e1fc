import math
from fractions import Fraction

import pytest

from buildctl.angles import Angle
from buildctl.complexes import (MetricComplex, discrete_complex,
                                orthogonal_join, vertex_link)
from buildctl.decompose import (JoinFactor, euclidean_factor_hint,
                                find_suspension_poles, join_decompose,
                                most_singular_vertex, suspension_factor)
from buildctl.metric_graph import GraphPoint, MetricGraph
from buildctl.recognizer import (BuildingCertificate, check_spherical,
                                 recognize_dim1)


def euclidean_cone(base: MetricComplex, apex="apex") -> MetricComplex:
    """Right cone: apex edges 1, base edges sqrt(2), so apex angles are pi/2."""
    names = [apex] + list(base.vertices)
    cells = [tuple(sorted([0] + [v + 1 for v in cell])) for cell in base.top_cells]
    lengths = [(0, v + 1, Angle(rad=1.0)) for v in range(len(base.vertices))]
    lengths += [(i + 1, j + 1, Angle(rad=math.sqrt(2.0))) for i, j in base.edges]
    return MetricComplex("euclidean", names, cells, lengths)


def test_octahedron_suspension_tower(octahedron):
    sf = suspension_factor(octahedron)
    assert sf is not None
    assert len(sf.pole_pairs) == 2
    assert sf.base is not None and len(sf.base.vertices) == 2
    # two peeled S0 pairs plus the S0 base: three S0 join factors in total
    peeled = {frozenset(p) for p in sf.pole_pairs}
    assert len(peeled) == 2


def test_s0_heawood_suspension(s0_heawood, heawood):
    sf = suspension_factor(s0_heawood)
    assert sf.pole_pairs == [("N", "S")]
    assert set(sf.base.vertices) == set(heawood.vertices)
    # pole test: the antipode of a pole is exactly the other pole
    assert find_suspension_poles(s0_heawood) == (
        s0_heawood.vertices.index("N"), s0_heawood.vertices.index("S"))


def test_heawood_no_suspension(heawood):
    assert suspension_factor(heawood) is None


def test_k33_no_suspension(k33):
    # a1 and a2 sit at distance pi, but a3 is not at pi/2 from both
    assert find_suspension_poles(k33) is None


def test_subdivided_suspension_poles():
    from buildctl.complexes import suspension
    sy = suspension(discrete_complex(["y0", "y1", "y2"]))
    sf = suspension_factor(sy)
    assert sf.pole_pairs == [("N", "S")]
    assert len(sf.base.vertices) == 3


def test_join_decompose_k33(k33):
    cert = recognize_dim1(k33)
    factors = join_decompose(k33, cert)
    assert len(factors) == 2
    sizes = sorted(len(f.complex.vertices) for f in factors)
    assert sizes == [3, 3]
    for f in factors:
        assert f.complex.dimension == 0
        assert isinstance(f.certificate, BuildingCertificate)
        assert f.certificate.verdict == "thick_building"


def test_join_decompose_octahedron(octahedron, octahedron_cert):
    factors = join_decompose(octahedron, octahedron_cert)
    assert len(factors) == 3
    for f in factors:
        assert len(f.complex.vertices) == 2
        assert f.certificate.verdict == "thin_building"


def test_join_decompose_irreducible(heawood, heawood_cert):
    factors = join_decompose(heawood, heawood_cert)
    assert len(factors) == 1
    assert factors[0].complex is heawood


def test_reassembly_lengths_verified(k33):
    cert = recognize_dim1(k33)
    # does not raise: the join of the factors reassembles K33 exactly
    join_decompose(k33, cert)


def test_factor_certificates_reverify(octahedron, octahedron_cert):
    for f in join_decompose(octahedron, octahedron_cert):
        again = check_spherical(f.complex)
        assert isinstance(again, BuildingCertificate)
        assert again.verdict == f.certificate.verdict


def test_hint_irreducible_at_window_vertex(a2_window):
    w = a2_window
    origin = w.complex.vertices.index("0_0")
    L = vertex_link(w.complex, origin)
    cert = recognize_dim1(L)
    hints = euclidean_factor_hint(w.complex, "0_0", cert)
    assert hints == [{"kind": "irreducible", "rank": 2, "m": 3, "thick": False}]


def test_hint_r3_at_octahedral_link(octahedron):
    cone = euclidean_cone(octahedron)
    L = vertex_link(cone, "apex")
    cert = check_spherical(L)
    assert cert.verdict == "thin_building"
    hints = euclidean_factor_hint(cone, "apex", cert)
    assert hints == [{"kind": "flat", "dim": 3}]


def test_hint_two_trees_at_k33_link(k33):
    cone = euclidean_cone(k33)
    L = vertex_link(cone, "apex")
    cert = recognize_dim1(L)
    assert cert.verdict == "thick_building" and cert.m == 2
    hints = euclidean_factor_hint(cone, "apex", cert)
    assert hints == [{"kind": "tree", "branching": 3},
                     {"kind": "tree", "branching": 3}]


def test_hint_tree_and_flat_at_suspension_link():
    from buildctl.complexes import suspension
    base = suspension(discrete_complex(["y0", "y1", "y2"]))
    cone = euclidean_cone(base)
    L = vertex_link(cone, "apex")
    cert = recognize_dim1(L)
    assert cert.verdict == "suspension"
    hints = euclidean_factor_hint(cone, "apex", cert)
    assert {"kind": "tree", "branching": 3} in hints
    assert {"kind": "flat", "dim": 1} in hints


def test_most_singular_vertex_deterministic(a2_window):
    from buildctl.recognizer import check_euclidean
    cert = check_euclidean(a2_window.complex, "window")
    v = most_singular_vertex(a2_window.complex, cert.link_certificates)
    # all interior links are the same irreducible hexagon: lexicographically
    # first interior vertex name wins
    interiors = sorted(a2_window.complex.vertices[vi]
                       for (vi,) in cert.link_certificates)
    assert a2_window.complex.vertices[v] == interiors[0]


def test_join_decompose_suspended_heawood(s0_heawood, s0_heawood_cert):
    factors = join_decompose(s0_heawood, s0_heawood_cert)
    assert len(factors) == 2
    by_dim = {f.complex.dimension: f for f in factors}
    assert set(by_dim) == {0, 1}
    assert by_dim[0].certificate.verdict == "thin_building"      # the S0 factor
    assert by_dim[1].certificate.verdict == "thick_building"     # Heawood
    assert by_dim[1].certificate.m == 3
