"""Finite stand-ins for a sigma-finite measure space.

Atoms are indivisible cells.  The non-atomic part is a list of cells that can
be halved as often as needed; a child's id is its parent's id plus one bit
(``B1`` -> ``B1~0``, ``B1~1``, ``B1~01`` ...), so anything keyed by an
ancestor id (function values, algebra blocks) resolves for every descendant.
"""

import ast
import math
import operator
from bisect import bisect_right, insort
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CarveError

SEP = "~"
DEFAULT_MAX_DEPTH = 60
SUPPORT_REL_EPS = 1e-12


def ancestors(cell_id):
    """cell_id itself, then each ancestor up to the root id."""
    yield cell_id
    if SEP not in cell_id:
        return
    root, bits = cell_id.split(SEP, 1)
    for k in range(len(bits) - 1, 0, -1):
        yield f"{root}{SEP}{bits[:k]}"
    yield root


def child_id(cell_id, bit):
    return f"{cell_id}{bit}" if SEP in cell_id else f"{cell_id}{SEP}{bit}"


@dataclass(frozen=True)
class Cell:
    id: str
    mass: float
    atomic: bool
    depth: int = 0


@dataclass(frozen=True)
class ParametricAtoms:
    """Countable atom family truncated at N; masses from a formula in n."""

    mass_formula: str
    N: int


@dataclass(frozen=True)
class MeasureSpace:
    cells: tuple
    parametric: ParametricAtoms = None

    def __post_init__(self):
        seen = set()
        for c in self.cells:
            if c.id in seen:
                raise ValueError(f"duplicate cell id {c.id!r}")
            seen.add(c.id)
            if not (math.isfinite(c.mass) and c.mass > 0.0):
                raise ValueError(f"cell {c.id!r} needs a positive finite mass, got {c.mass!r}")

    @classmethod
    def from_masses(cls, atoms=None, nonatomic=None):
        atoms = atoms or {}
        nonatomic = nonatomic or {}
        for k in list(atoms) + list(nonatomic):
            if SEP in k:
                raise ValueError(f"ids may not contain {SEP!r}: {k!r}")
        cells = [Cell(k, float(m), True) for k, m in atoms.items()]
        cells += [Cell(k, float(m), False) for k, m in nonatomic.items()]
        return cls(tuple(cells))

    @classmethod
    def from_parametric(cls, mass_formula, N, nonatomic=None):
        fn = compile_formula(mass_formula)
        atoms = {f"A{n}": fn(n) for n in range(1, N + 1)}
        base = cls.from_masses(atoms, nonatomic)
        return cls(base.cells, ParametricAtoms(mass_formula, N))

    def materialize(self, N):
        """Same family truncated at N atoms; the non-atomic cells are kept."""
        if self.parametric is None:
            raise ValueError("space is not parametric")
        fn = compile_formula(self.parametric.mass_formula)
        cells = [Cell(f"A{n}", fn(n), True) for n in range(1, N + 1)]
        cells += [c for c in self.cells if not c.atomic]
        return MeasureSpace(tuple(cells), ParametricAtoms(self.parametric.mass_formula, N))

    @property
    def truncation(self):
        return None if self.parametric is None else self.parametric.N

    @cached_property
    def index(self):
        return {c.id: i for i, c in enumerate(self.cells)}

    @cached_property
    def ids(self):
        return [c.id for c in self.cells]

    @cached_property
    def masses(self):
        m = np.array([c.mass for c in self.cells], dtype=float)
        m.setflags(write=False)
        return m

    @cached_property
    def atomic_mask(self):
        m = np.array([c.atomic for c in self.cells], dtype=bool)
        m.setflags(write=False)
        return m

    @property
    def atoms(self):
        return [c for c in self.cells if c.atomic]

    @property
    def nonatomic(self):
        return [c for c in self.cells if not c.atomic]

    @property
    def total_mass(self):
        return math.fsum(c.mass for c in self.cells)

    def cell(self, cell_id):
        return self.cells[self.index[cell_id]]

    def region_cells(self, region):
        """Cells of this space lying in `region` (a set of ids or ancestor ids)."""
        region = set(region)
        return [c for c in self.cells if any(a in region for a in ancestors(c.id))]

    def mass_of(self, ids):
        return math.fsum(self.cell(i).mass for i in ids)


def refine(space, cell_id):
    """Replace a non-atomic cell by its two half-mass children."""
    c = space.cell(cell_id)
    if c.atomic:
        raise ValueError(f"{cell_id!r} is an atom and cannot be split")
    half = 0.5 * c.mass
    kids = (Cell(child_id(c.id, 0), half, False, c.depth + 1),
            Cell(child_id(c.id, 1), half, False, c.depth + 1))
    i = space.index[cell_id]
    return MeasureSpace(space.cells[:i] + kids + space.cells[i + 1:], space.parametric)


class _Carver:
    """Greedy dyadic carving. Free cells are kept per eligibility level in a
    list sorted by mass; a target takes the largest free cell that fits and
    halves the smallest one that does not."""

    def __init__(self, space, free_cells, level_of, max_depth):
        self.max_depth = max_depth
        self.kept = {c.id: c for c in space.cells}
        self.order = list(space.ids)
        self.pools = {}
        for c in free_cells:
            insort(self.pools.setdefault(level_of(c), []), (c.mass, c.id))

    def _split(self, level, entry):
        mass, cid = entry
        c = self.kept[cid]
        if c.depth + 1 > self.max_depth:
            raise CarveError(f"depth limit {self.max_depth} exceeded while carving")
        half = 0.5 * mass
        kids = [Cell(child_id(cid, b), half, False, c.depth + 1) for b in (0, 1)]
        del self.kept[cid]
        for k in kids:
            self.kept[k.id] = k
        pos = self.order.index(cid)
        self.order[pos:pos + 1] = [k.id for k in kids]
        return kids

    def take(self, target, max_level, rel_tol):
        remaining = target
        got = []
        pools = [lvl for lvl in self.pools if lvl <= max_level]
        while remaining > rel_tol * target:
            best = None
            for lvl in pools:
                pool = self.pools[lvl]
                j = bisect_right(pool, (remaining, "￿"))
                if j > 0 and (best is None or pool[j - 1][0] > best[1][0]):
                    best = (lvl, pool[j - 1], j - 1)
            if best is not None:
                lvl, entry, j = best
                del self.pools[lvl][j]
                got.append(entry[1])
                remaining -= entry[0]
                continue
            # nothing fits: halve the smallest eligible cell above `remaining`
            cand = None
            for lvl in pools:
                pool = self.pools[lvl]
                if pool and (cand is None or pool[0][0] < cand[1][0]):
                    cand = (lvl, pool[0])
            if cand is None:
                raise CarveError("region exhausted before targets were met")
            lvl, entry = cand
            self.pools[lvl].pop(0)
            a, b = self._split(lvl, entry)
            insort(self.pools[lvl], (a.mass, a.id))
            insort(self.pools[lvl], (b.mass, b.id))
        return got

    def space(self, parametric):
        return MeasureSpace(tuple(self.kept[i] for i in self.order), parametric)


def carve_subsets(space, region, targets, max_depth=DEFAULT_MAX_DEPTH, rel_tol=1e-10, levels=None):
    """Carve pairwise-disjoint unions of cells with the given masses out of a
    non-atomic region.

    Returns (refined_space, [frozenset of cell ids, ...]).  With `levels`
    (a map cell -> int) target k may only use cells whose level is <= k + 1,
    which is how nested eligibility regions are expressed.
    """
    cells = space.region_cells(region)
    if any(c.atomic for c in cells):
        raise ValueError("carving region must lie in the non-atomic part")
    if any(not t > 0.0 for t in targets):
        raise ValueError("target masses must be positive")
    if math.fsum(targets) > math.fsum(c.mass for c in cells) * (1 + 1e-12):
        raise CarveError("targets exceed the mass of the region")
    level_of = (lambda c: 0) if levels is None else (lambda c: levels(c))
    carver = _Carver(space, cells, level_of, max_depth)
    sets = []
    for k, t in enumerate(targets):
        max_level = 0 if levels is None else k + 1
        sets.append(frozenset(carver.take(t, max_level, rel_tol)))
    return carver.space(space.parametric), sets


@dataclass(frozen=True)
class SubSigmaAlgebra:
    """Partition of cell ids into named blocks. Blocks may list ancestor ids;
    descendants produced by refinement inherit the ancestor's block."""

    blocks: dict

    @classmethod
    def finest(cls, space):
        return cls({c.id: (c.id,) for c in space.cells})

    @classmethod
    def grouped_atoms(cls, space, k):
        """Consecutive atoms in groups of k; each non-atomic cell on its own."""
        blocks = {}
        atoms = space.atoms
        for j in range(0, len(atoms), k):
            grp = atoms[j:j + k]
            blocks[f"G{j // k + 1}"] = tuple(c.id for c in grp)
        for c in space.nonatomic:
            blocks[c.id] = (c.id,)
        return cls(blocks)

    @cached_property
    def _owner(self):
        own = {}
        for name, ids in self.blocks.items():
            for i in ids:
                if i in own:
                    raise ValueError(f"id {i!r} appears in two blocks")
                own[i] = name
        return own

    def block_of(self, cell_id):
        own = self._owner
        for a in ancestors(cell_id):
            if a in own:
                return own[a]
        raise KeyError(f"cell {cell_id!r} is not covered by the algebra")

    def labels(self, space):
        """(names, index array aligned with space.cells)."""
        names = list(self.blocks)
        pos = {n: i for i, n in enumerate(names)}
        idx = np.array([pos[self.block_of(c.id)] for c in space.cells], dtype=np.intp)
        used = np.unique(idx)
        if len(used) != len(names):
            # blocks with no cells would have zero mass; drop them
            keep = [names[i] for i in used]
            remap = {old: new for new, old in enumerate(used)}
            idx = np.array([remap[i] for i in idx], dtype=np.intp)
            names = keep
        return names, idx


@dataclass(frozen=True)
class SimpleFunction:
    """Cell-indexed values; unspecified cells take `default`."""

    values: dict = field(default_factory=dict)
    default: float = 0.0

    @classmethod
    def constant(cls, c):
        return cls({}, float(c))

    @classmethod
    def indicator(cls, ids, value=1.0):
        return cls({i: float(value) for i in ids}, 0.0)

    @classmethod
    def from_array(cls, space, arr):
        return cls(dict(zip(space.ids, map(float, arr))), 0.0)

    @classmethod
    def from_formula(cls, space, formula, nonatomic=0.0):
        """Atom A_n (1-based, in space order) gets formula(n)."""
        fn = compile_formula(formula)
        vals = {c.id: fn(n) for n, c in enumerate(space.atoms, start=1)}
        for c in space.nonatomic:
            vals[c.id] = float(nonatomic)
        return cls(vals, 0.0)

    def value_at(self, cell_id):
        vals = self.values
        for a in ancestors(cell_id):
            if a in vals:
                return vals[a]
        return self.default

    def as_array(self, space):
        return np.array([self.value_at(i) for i in space.ids], dtype=float)

    def _combine(self, other, op):
        if not isinstance(other, SimpleFunction):
            other = SimpleFunction.constant(other)
        keys = set(self.values) | set(other.values)
        return SimpleFunction({k: op(self.value_at(k), other.value_at(k)) for k in keys},
                              op(self.default, other.default))

    def __add__(self, other):
        return self._combine(other, operator.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, operator.sub)

    def __mul__(self, other):
        return self._combine(other, operator.mul)

    __rmul__ = __mul__

    def __abs__(self):
        return SimpleFunction({k: abs(v) for k, v in self.values.items()}, abs(self.default))

    def map(self, fn):
        return SimpleFunction({k: fn(v) for k, v in self.values.items()}, fn(self.default))

    def compose(self, phi):
        return self.map(phi.evaluate)

    def support(self, space, eps=None):
        arr = self.as_array(space)
        eps = support_eps(arr) if eps is None else eps
        return frozenset(i for i, v in zip(space.ids, arr) if abs(v) > eps)


def support_eps(arr):
    finite = np.abs(arr[np.isfinite(arr)]) if len(arr) else np.zeros(0)
    top = float(finite.max()) if finite.size else 0.0
    return SUPPORT_REL_EPS * max(top, 1.0)


def integrate(f, space):
    """Sum of value * mass with compensated summation; inf propagates."""
    arr = f.as_array(space) if isinstance(f, SimpleFunction) else np.asarray(f, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = arr * space.masses
    return math.fsum(terms.tolist())


# ---------------------------------------------------------------------------
# tiny expression grammar for parametric families: numbers, n, + - * / ^,
# unary minus, exp/log/sqrt

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt}
_NAMES = {"e": math.e, "pi": math.pi}


def compile_formula(text):
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return check(node.left) and check(node.right)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            return check(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return True
        if isinstance(node, ast.Name) and (node.id == "n" or node.id in _NAMES):
            return True
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return check(node.args[0])
        raise ValueError(f"unsupported syntax in formula {text!r}: {ast.dump(node)[:60]}")

    check(tree)

    def ev(node, n):
        if isinstance(node, ast.Expression):
            return ev(node.body, n)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](ev(node.left, n), ev(node.right, n))
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, n)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return float(n) if node.id == "n" else _NAMES[node.id]
        return _FUNCS[node.func.id](ev(node.args[0], n))

    def fn(n):
        return float(ev(tree, n))

    fn.text = text
    return fn
