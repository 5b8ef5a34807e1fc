"""Coxeter matrices: cosine form, classification, reflection groups, complexes.

The cosine form B(s,t) = -cos(pi/m(s,t)) drives everything: positive definite
means a finite (spherical) group, positive semidefinite with 1-dimensional
kernel per irreducible component means a Euclidean group.  For spherical
systems the group is enumerated as orthogonal matrices and the unit sphere is
cellulated by the translates of the fundamental chamber.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .angles import Angle, EPS_GRAM
from .complexes import MetricComplex, SPHERICAL

INFINITE = 0          # JSON and internal encoding of m(s,t) = infinity
B_GROUP_DEFAULT = 10 ** 6


class CoxeterError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CoxeterMatrix:
    generators: tuple[str, ...]
    m: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.generators)
        if len(set(self.generators)) != n:
            raise CoxeterError("duplicate generator names")
        if len(self.m) != n or any(len(r) != n for r in self.m):
            raise CoxeterError("matrix shape does not match generators")
        for i in range(n):
            if self.m[i][i] != 1:
                raise CoxeterError(f"m({i},{i}) must be 1")
            for j in range(n):
                if self.m[i][j] != self.m[j][i]:
                    raise CoxeterError("matrix not symmetric")
                if i != j and self.m[i][j] != INFINITE and self.m[i][j] < 2:
                    raise CoxeterError(f"m({i},{j}) must be >= 2 or infinite")
        object.__setattr__(self, "m", tuple(tuple(r) for r in self.m))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def order_of(self, i: int, j: int) -> int:
        return self.m[i][j]

    def submatrix(self, idxs: Sequence[int]) -> "CoxeterMatrix":
        idxs = list(idxs)
        return CoxeterMatrix(tuple(self.generators[i] for i in idxs),
                             tuple(tuple(self.m[i][j] for j in idxs) for i in idxs))

    def to_json_dict(self) -> dict:
        return {"generators": list(self.generators), "m": [list(r) for r in self.m]}

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @staticmethod
    def from_json_dict(obj: dict) -> "CoxeterMatrix":
        try:
            gens = tuple(str(g) for g in obj["generators"])
            m = tuple(tuple(int(x) for x in row) for row in obj["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CoxeterError(f"malformed Coxeter matrix record: {exc}") from exc
        return CoxeterMatrix(gens, m)

    def describe(self) -> str:
        return ",".join(f"{self.generators[i]}-{self.generators[j]}:{self.m[i][j]}"
                        for i in range(self.rank) for j in range(i + 1, self.rank)
                        if self.m[i][j] != 2)


def dihedral(m: int, names=("s", "t")) -> CoxeterMatrix:
    return CoxeterMatrix(tuple(names), ((1, m), (m, 1)))


def named_matrix(name: str) -> CoxeterMatrix:
    """A small table of named systems used by the corpus and tests."""
    key = name.upper().replace(" ", "")
    if key.startswith("I2(") and key.endswith(")"):
        return dihedral(int(key[3:-1]))
    table = {
        "A1": ((1,),),
        "A2": ((1, 3), (3, 1)),
        "B2": ((1, 4), (4, 1)),
        "G2": ((1, 6), (6, 1)),
        "A3": ((1, 3, 2), (3, 1, 3), (2, 3, 1)),
        "B3": ((1, 4, 2), (4, 1, 3), (2, 3, 1)),
        "A1XA1": ((1, 2), (2, 1)),
        "A1XA1XA1": ((1, 2, 2), (2, 1, 2), (2, 2, 1)),
        "A1XI2(3)": ((1, 2, 2), (2, 1, 3), (2, 3, 1)),
        "~A2": ((1, 3, 3), (3, 1, 3), (3, 3, 1)),
        "A2~": ((1, 3, 3), (3, 1, 3), (3, 3, 1)),
    }
    if key not in table:
        raise CoxeterError(f"unknown Coxeter system name {name!r}")
    rows = table[key]
    gens = tuple(f"s{i}" for i in range(len(rows)))
    return CoxeterMatrix(gens, rows)


def cosine_form(M: CoxeterMatrix) -> np.ndarray:
    """B(s,t) = -cos(pi/m(s,t)); pi/infinity is 0."""
    n = M.rank
    B = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            mij = M.m[i][j]
            B[i, j] = -1.0 if mij == INFINITE else -math.cos(math.pi / mij)
    return B


def irreducible_components(M: CoxeterMatrix) -> tuple[tuple[int, ...], ...]:
    """Connected components of the diagram (edges where m >= 3 or infinite)."""
    n = M.rank
    seen: set[int] = set()
    comps = []
    for s in range(n):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v in range(n):
                if v not in comp and (M.m[u][v] == INFINITE or M.m[u][v] >= 3):
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        comps.append(tuple(sorted(comp)))
    return tuple(sorted(comps))


@dataclass(frozen=True)
class CoxeterClassification:
    verdict: str                       # spherical | euclidean | other
    components: tuple[tuple[int, ...], ...]
    component_verdicts: tuple[str, ...]
    group_order: int | None            # None means infinite or unknown
    order_known: bool

    def to_json(self):
        return {
            "verdict": self.verdict,
            "components": [list(c) for c in self.components],
            "component_verdicts": list(self.component_verdicts),
            "group_order": self.group_order,
            "order_known": self.order_known,
        }


def classify(M: CoxeterMatrix, budget: int = B_GROUP_DEFAULT) -> CoxeterClassification:
    """Spherical/Euclidean/other by eigenvalue signs of the cosine form."""
    comps = irreducible_components(M)
    verdicts = []
    for comp in comps:
        B = cosine_form(M.submatrix(comp))
        w = np.linalg.eigvalsh(B)
        if w[0] > EPS_GRAM:
            verdicts.append("spherical")
        elif abs(w[0]) <= EPS_GRAM and (len(w) == 1 or w[1] > EPS_GRAM):
            # semidefinite with a 1-dimensional kernel, irreducible by choice
            verdicts.append("euclidean")
        else:
            verdicts.append("other")
    if all(v == "spherical" for v in verdicts):
        verdict = "spherical"
    elif all(v == "euclidean" for v in verdicts):
        verdict = "euclidean"
    else:
        verdict = "other"
    order: int | None = None
    known = True
    if verdict == "spherical":
        order = 1
        try:
            for comp in comps:
                order *= len(generate_reflection_group(M.submatrix(comp), budget=budget))
        except BudgetExceeded:
            order = None
            known = False
    return CoxeterClassification(verdict, comps, tuple(verdicts), order, known)


def _sqrt_form(B: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh(B)
    if w[0] <= EPS_GRAM:
        raise CoxeterError("cosine form is not positive definite")
    return Q @ np.diag(np.sqrt(w)) @ Q.T


@dataclass(frozen=True)
class GroupElement:
    word: tuple[int, ...]      # reduced-by-construction generator word
    matrix: np.ndarray = field(repr=False, compare=False)


def generate_reflection_group(M: CoxeterMatrix, budget: int = B_GROUP_DEFAULT
                              ) -> list[GroupElement]:
    """All elements of a finite reflection group as orthogonal matrices.

    Breadth-first closure over right multiplication by the generating
    reflections; deterministic order (word length, then lexicographic word).
    """
    B = cosine_form(M)
    C = _sqrt_form(B)
    n = M.rank
    refl = [np.eye(n) - 2.0 * np.outer(C[s], C[s]) for s in range(n)]
    ident = GroupElement((), np.eye(n))
    elems = [ident]
    keys = {_matrix_key(ident.matrix)}
    frontier = [ident]
    while frontier:
        new: list[GroupElement] = []
        for g in frontier:
            for s in range(n):
                h = g.matrix @ refl[s]
                k = _matrix_key(h)
                if k in keys:
                    continue
                keys.add(k)
                new.append(GroupElement(g.word + (s,), h))
                if len(keys) > budget:
                    raise BudgetExceeded(f"group enumeration exceeded budget {budget}")
        new.sort(key=lambda e: e.word)
        elems.extend(new)
        frontier = new
    return elems


def _matrix_key(m: np.ndarray) -> tuple:
    return tuple(np.round(m, 9).flatten().tolist())


@dataclass
class CoxeterComplexModel:
    system: CoxeterMatrix
    elements: list[GroupElement]
    complex: MetricComplex
    chamber_of: dict[tuple[int, ...], tuple]     # word -> top cell
    vertex_types: tuple[int, ...]                # per complex vertex
    vertex_coords: np.ndarray                    # unit vectors, row per vertex


def coxeter_complex(M: CoxeterMatrix, budget: int = B_GROUP_DEFAULT) -> CoxeterComplexModel:
    """The unit sphere cellulated by the translates of the fundamental chamber.

    Fundamental chamber vertices are the dual basis of the wall normals,
    normalized; the W-orbit gives the vertex set and each group element
    contributes one top cell.
    """
    cls = classify(M, budget=budget)
    if cls.verdict != "spherical":
        raise CoxeterError(f"coxeter_complex needs a spherical system, got {cls.verdict}")
    B = cosine_form(M)
    C = _sqrt_form(B)
    n = M.rank
    P = np.linalg.inv(C)     # column i: direction positive on wall i, on others zero
    ps = [P[:, i] / np.linalg.norm(P[:, i]) for i in range(n)]
    elems = generate_reflection_group(M, budget=budget)
    coords: list[np.ndarray] = []
    vkeys: dict[tuple, int] = {}
    vtypes: list[int] = []

    def vid(x: np.ndarray, typ: int) -> int:
        k = tuple(np.round(x, 9).tolist())
        i = vkeys.get(k)
        if i is None:
            i = len(coords)
            vkeys[k] = i
            coords.append(x)
            vtypes.append(typ)
        return i

    chamber_of = {}
    cells = []
    for g in elems:
        cell = tuple(sorted(vid(g.matrix @ ps[i], i) for i in range(n)))
        chamber_of[g.word] = cell
        cells.append(cell)
    names = [f"w{vtypes[i]}.{i}" for i in range(len(coords))]
    lengths = []
    seen = set()
    for cell in cells:
        for i, j in itertools.combinations(cell, 2):
            if (i, j) in seen:
                continue
            seen.add((i, j))
            cosv = float(np.clip(np.dot(coords[i], coords[j]), -1.0, 1.0))
            lengths.append((i, j, Angle.from_radians(math.acos(cosv))))
    cx = MetricComplex(SPHERICAL, names, cells, lengths,
                       allow_disconnected=(n == 1),
                       provenance=f"coxeter_complex({M.describe() or 'A1^' + str(n)})")
    return CoxeterComplexModel(M, elems, cx, chamber_of, tuple(vtypes),
                               np.array(coords) if coords else np.zeros((0, n)))
