"""Evaluators for the implicit norms and their auxiliary norms.

Spaces:

  * l1, c0, lp(p): closed forms.
  * Tsirelson: the implicit norm
        |x| = max(sup|x_i|, sup (1/2) sum |E_i x|)
    over successive E_1 < ... < E_k with k <= min E_1, computed by an exact
    memoised dynamic program over interval restrictions of the support.
    Values are dyadic rationals; the witness is a partition tree.
  * Schlumprecht: the same scheme with weight 1/log2(k+1); the weights are
    irrational, so values are floats with a declared tolerance.
  * Mixed Schreier space X(xi): normed by the set W generated from unit
    functionals by scaled averages and by admissible, very fast growing
    sums of averages.  The norm satisfies

        |x| = max(sup|x_i|, sup sum_q |E_q x|_{j_q})

    over S_{w^xi}-admissible E_1 < ... < E_d with j_q above the previous
    piece's max, where |y|_j = sup (1/j) sum over at most j pieces.  Every
    cycle of that implicit system passes through a weight <= 1/2 self map
    which can never attain the sup, so excluding the one degenerate
    configuration turns it into a well-founded recursion on support
    intervals; the recursion below computes its least fixpoint exactly and
    assembles a norming functional witnessing each value from below.

Piece systems are restricted to interval chunks of the support, with gaps
allowed between pieces but not inside them: all these norms are
1-unconditional lattice norms, monotone under support restriction, so
filling an internal gap never lowers a piece norm while the piece minimum
(which admissibility constrains) only moves left when extending that way;
the sup over interval systems therefore equals the sup over arbitrary
successive systems.  Within a chosen piece system the minimal legal
weights j_q are optimal because best-sum(j)/j is non-increasing in j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .families import SchreierFamily, member
from .ordinals import Ordinal, omega_power
from .vectors import (
    Average,
    Functional,
    SumNode,
    Unit,
    Vector,
    evaluate,
    functional_support,
)

# ---------------------------------------------------------------------------
# space descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class L1Space:
    pass


@dataclass(frozen=True)
class C0Space:
    pass


@dataclass(frozen=True)
class LpSpace:
    p: float

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise ValueError("lp requires p > 1 (use l1 for p = 1)")


@dataclass(frozen=True)
class TsirelsonSpace:
    pass


@dataclass(frozen=True)
class SchlumprechtSpace:
    tolerance: float = 1e-9


@dataclass(frozen=True)
class MixedSchreierSpace:
    xi: Ordinal
    depth_cap: int = 64

    def __post_init__(self) -> None:
        if self.xi.is_zero:
            raise ValueError("the mixed Schreier space needs xi >= 1")
        if self.depth_cap < 1:
            raise ValueError("depth cap must be >= 1")


NormSpace = Union[L1Space, C0Space, LpSpace, TsirelsonSpace, SchlumprechtSpace, MixedSchreierSpace]

L1 = L1Space()
C0 = C0Space()
T = TsirelsonSpace()


# ---------------------------------------------------------------------------
# results and partition witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartLeaf:
    coord: int
    sign: int


@dataclass(frozen=True)
class PartNode:
    """weight * (sum of children); the partition-tree witness."""

    weight: Fraction
    children: Tuple["Partition", ...]


Partition = Union[PartLeaf, PartNode]


def evaluate_partition(w: Partition, x: Vector):
    if isinstance(w, PartLeaf):
        return w.sign * x[w.coord]
    return w.weight * sum(evaluate_partition(c, x) for c in w.children)


@dataclass
class NormResult:
    value: Union[Fraction, float]
    exact: bool
    converged: bool = True
    witness: Optional[Union[Partition, Functional]] = None
    tolerance: float = 0.0

    def achieved(self, x: Vector) -> bool:
        """Exact results must be reproduced by their witness."""
        if not self.exact or self.witness is None:
            return True
        if isinstance(self.witness, (PartLeaf, PartNode)):
            return evaluate_partition(self.witness, x) == self.value
        return evaluate(self.witness, x) == self.value


def _leaf(x: Vector, coord: int) -> PartLeaf:
    return PartLeaf(coord, -1 if x[coord] < 0 else 1)


def _best_leaf(x: Vector) -> Tuple[Fraction, Optional[PartLeaf]]:
    if x.is_zero:
        return Fraction(0), None
    coord = max(x.support(), key=lambda c: abs(x[c]))
    return abs(x[coord]), _leaf(x, coord)


# ---------------------------------------------------------------------------
# Tsirelson and Schlumprecht evaluators
# ---------------------------------------------------------------------------


class _TsirelsonSession:
    """Exact DP over interval restrictions of the support.

    norm[i,j] is the norm of x restricted to support positions i..j.  A
    partition starts at some position s (dropping earlier positions keeps
    min E_1 large) and splits positions s..j into k contiguous chunks,
    2 <= k <= min(value at s, chunk count available).
    """

    def __init__(self, x: Vector):
        self.x = x
        self.pos = x.support()
        self.memo: Dict[Tuple[int, int], Tuple[Fraction, Partition]] = {}

    def norm(self, i: int, j: int) -> Tuple[Fraction, Partition]:
        key = (i, j)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        sub = self.x.restrict(self.pos[i : j + 1])
        best, wit = _best_leaf(sub)
        for s in range(i, j + 1):
            kmax = min(self.pos[s], j - s + 1)
            for k in range(2, kmax + 1):
                val, parts = self._split(s, j, k)
                val = val / 2
                if val > best:
                    best, wit = val, PartNode(Fraction(1, 2), parts)
        self.memo[key] = (best, wit)
        return best, wit

    def _split(self, s: int, j: int, k: int) -> Tuple[Fraction, Tuple[Partition, ...]]:
        """Best sum over exactly k contiguous chunks covering positions s..j."""
        if k == 1:
            v, w = self.norm(s, j)
            return v, (w,)
        best = None
        best_parts: Tuple[Partition, ...] = ()
        for m in range(s, j - k + 2):
            v1, w1 = self.norm(s, m)
            v2, parts = self._split(m + 1, j, k - 1)
            if best is None or v1 + v2 > best:
                best, best_parts = v1 + v2, (w1,) + parts
        return best, best_parts


def _tsirelson_norm(x: Vector) -> NormResult:
    if x.is_zero:
        return NormResult(Fraction(0), exact=True)
    session = _TsirelsonSession(x)
    value, wit = session.norm(0, len(x.support()) - 1)
    return NormResult(value, exact=True, witness=wit)


class _SchlumprechtSession:
    """Same DP shape as Tsirelson with weight 1/log2(k+1) and no
    admissibility constraint; float arithmetic with a declared tolerance."""

    def __init__(self, x: Vector):
        self.x = x
        self.pos = x.support()
        self.vals = [float(x[c]) for c in self.pos]
        self.memo: Dict[Tuple[int, int], float] = {}

    def norm(self, i: int, j: int) -> float:
        key = (i, j)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        best = max(abs(v) for v in self.vals[i : j + 1])
        n = j - i + 1
        for k in range(2, n + 1):
            best = max(best, self._split(i, j, k) / math.log2(k + 1))
        self.memo[key] = best
        return best

    def _split(self, i: int, j: int, k: int) -> float:
        if k == 1:
            return self.norm(i, j)
        return max(self.norm(i, m) + self._split(m + 1, j, k - 1) for m in range(i, j - k + 2))


def _schlumprecht_norm(x: Vector, tolerance: float) -> NormResult:
    if x.is_zero:
        return NormResult(0.0, exact=False, tolerance=tolerance)
    session = _SchlumprechtSession(x)
    value = session.norm(0, len(x.support()) - 1)
    return NormResult(value, exact=False, tolerance=tolerance)


# ---------------------------------------------------------------------------
# mixed Schreier space evaluator
# ---------------------------------------------------------------------------


class _MixedSession:
    """Exact recursion for the mixed Schreier norm with functional witnesses.

    Pieces are intervals of support positions: (start, end) inclusive.
    `norm(i, j)` evaluates the restriction to positions i..j; `weighted`
    is the auxiliary |y|_j value over chunk covers.  Budget guards the
    worst-case exponential piece-system enumeration; when it runs out the
    session keeps the values found so far, which stay certified lower
    bounds, and reports non-convergence.
    """

    def __init__(self, x: Vector, xi: Ordinal, depth_cap: int, budget: int = 30_000_000):
        self.x = x
        self.pos = x.support()
        self.fam = SchreierFamily(omega_power(xi))
        self.depth_cap = depth_cap
        self.budget = budget
        self.converged = True
        self.norm_memo: Dict[Tuple[int, int], Tuple[Fraction, Functional]] = {}
        self.cover_memo: Dict[Tuple[int, int, int], Tuple[Fraction, Tuple[Functional, ...]]] = {}

    def _tick(self) -> bool:
        self.budget -= 1
        if self.budget < 0:
            self.converged = False
            return False
        return True

    def norm(self, i: int, j: int, depth: int = 0) -> Tuple[Fraction, Functional]:
        key = (i, j)
        hit = self.norm_memo.get(key)
        if hit is not None:
            return hit
        sub = self.x.restrict(self.pos[i : j + 1])
        coord = max(sub.support(), key=lambda c: abs(sub[c]))
        state: List = [abs(sub[coord]), Unit(-1 if sub[coord] < 0 else 1, coord)]
        if depth >= self.depth_cap:
            self.converged = False
            self.norm_memo[key] = (state[0], state[1])
            return state[0], state[1]

        # DFS over piece systems: successive intervals with gaps allowed,
        # minima admissible, excluding the single whole-interval piece.
        def dfs(
            start: int,
            minima: Tuple[int, ...],
            prev_size: int,
            prev_max: int,
            total: Fraction,
            children: Tuple[Average, ...],
        ) -> None:
            for a in range(start, j + 1):
                # everything from position a rightwards is worth at most
                # its l1 mass, and that mass shrinks as a grows
                if total + self._l1(a, j) <= state[0]:
                    return
                new_minima = minima + (self.pos[a],)
                if not member(new_minima, self.fam).member:
                    # admissible sets are closed under initial segments,
                    # so no extension of this minima prefix can work
                    continue
                jq = max(2, prev_size + 1, prev_max + 1)
                for b in range(a, j + 1):
                    if not self._tick():
                        return
                    if not children and (a, b) == (i, j):
                        continue
                    val, chunk_wits = self.cover(a, b, jq, depth + 1)
                    t2 = total + val / jq
                    ch2 = children + (Average(jq, chunk_wits),)
                    if t2 > state[0]:
                        state[0], state[1] = t2, SumNode(ch2)
                    dfs(b + 1, new_minima, jq, self.pos[b], t2, ch2)

        dfs(i, (), 0, 0, Fraction(0), ())
        self.norm_memo[key] = (state[0], state[1])
        return state[0], state[1]

    def cover(
        self, i: int, j: int, jweight: int, depth: int
    ) -> Tuple[Fraction, Tuple[Functional, ...]]:
        """Best sum over at most jweight contiguous chunks covering i..j."""
        k = min(jweight, j - i + 1)
        key = (i, j, k)
        hit = self.cover_memo.get(key)
        if hit is not None:
            return hit
        v, w = self.norm(i, j, depth)
        best, best_wits = v, (w,)
        if k > 1:
            for m in range(i, j):
                v1, w1 = self.norm(i, m, depth)
                v2, wits = self.cover(m + 1, j, k - 1, depth)
                if v1 + v2 > best:
                    best, best_wits = v1 + v2, (w1,) + wits
        self.cover_memo[key] = (best, best_wits)
        return best, best_wits

    def _l1(self, i: int, j: int) -> Fraction:
        return sum((abs(self.x[self.pos[t]]) for t in range(i, j + 1)), Fraction(0))


def _mixed_norm(space: MixedSchreierSpace, x: Vector) -> NormResult:
    if x.is_zero:
        return NormResult(Fraction(0), exact=True)
    session = _MixedSession(x, space.xi, space.depth_cap)
    value, wit = session.norm(0, len(x.support()) - 1)
    return NormResult(value, exact=session.converged, converged=session.converged, witness=wit)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def norm(space: NormSpace, x: Vector) -> NormResult:
    """Norm of a finitely supported vector in the given space.

    Exact rational for l1, c0, Tsirelson and the mixed Schreier space
    (there the result is a certified lower bound with converged=False if
    the budget or depth cap is hit); float with declared tolerance for lp
    and Schlumprecht.  Exact results carry a witness that re-evaluates to
    the value.
    """
    if isinstance(space, L1Space):
        if x.is_zero:
            return NormResult(Fraction(0), exact=True)
        leaves = tuple(_leaf(x, c) for c in x.support())
        return NormResult(x.l1(), exact=True, witness=PartNode(Fraction(1), leaves))
    if isinstance(space, C0Space):
        value, wit = _best_leaf(x)
        return NormResult(value, exact=True, witness=wit)
    if isinstance(space, LpSpace):
        value = sum(abs(float(v)) ** space.p for _, v in x.entries) ** (1.0 / space.p)
        return NormResult(value, exact=False, tolerance=1e-12)
    if isinstance(space, TsirelsonSpace):
        return _tsirelson_norm(x)
    if isinstance(space, SchlumprechtSpace):
        return _schlumprecht_norm(x, space.tolerance)
    if isinstance(space, MixedSchreierSpace):
        return _mixed_norm(space, x)
    raise TypeError(f"not a norm space: {space!r}")


def norm_value(space: NormSpace, x: Vector):
    return norm(space, x).value


def norm_j(space: NormSpace, x: Vector, j: int) -> NormResult:
    """|x|_j = sup (1/j) * sum of piece norms over at most j successive pieces.

    Exact via a chunk-cover dynamic program over the support (interval
    pieces covering the support suffice: the norms here are monotone under
    support restriction and subadditive over splits).
    """
    if j < 2:
        raise ValueError("the weighted norms need j >= 2")
    if x.is_zero:
        return NormResult(Fraction(0), exact=True)
    intervals, chunk_results = _best_cover(space, x, j)
    exact = all(r.exact for r in chunk_results)
    total = sum(r.value for r in chunk_results)
    if exact:
        total = Fraction(total) / j
        witness = PartNode(Fraction(1, j), tuple(r.witness for r in chunk_results))
        return NormResult(total, exact=True, witness=witness)
    return NormResult(total / j, exact=False, tolerance=1e-9)


def interval_norm(space: NormSpace, x: Vector, n: int) -> NormResult:
    """Sup of sums of norms over at most n successive interval restrictions."""
    if n < 1:
        raise ValueError("need n >= 1 intervals")
    if x.is_zero:
        return NormResult(Fraction(0), exact=True)
    intervals, chunk_results = _best_cover(space, x, n)
    exact = all(r.exact for r in chunk_results)
    total = sum(r.value for r in chunk_results)
    if exact:
        witness = PartNode(Fraction(1), tuple(r.witness for r in chunk_results))
        return NormResult(Fraction(total), exact=True, witness=witness)
    return NormResult(total, exact=False, tolerance=1e-9)


def _best_cover(space: NormSpace, x: Vector, max_pieces: int):
    """Best split of the support into at most max_pieces interval chunks,
    maximising the sum of chunk norms.

    Covering chunks with the largest allowed count are optimal: splitting a
    chunk never lowers the sum (triangle inequality) and filling gaps never
    lowers a chunk norm (support monotonicity).
    """
    pos = x.support()
    n = len(pos)
    chunk_memo: Dict[Tuple[int, int], NormResult] = {}

    def chunk(i: int, jx: int) -> NormResult:
        key = (i, jx)
        if key not in chunk_memo:
            chunk_memo[key] = norm(space, x.restrict(pos[i : jx + 1]))
        return chunk_memo[key]

    memo: Dict[Tuple[int, int], Tuple[object, Tuple[Tuple[int, int], ...]]] = {}

    def best(i: int, k: int):
        key = (i, k)
        if key in memo:
            return memo[key]
        if k == 1 or i == n - 1:
            out = (chunk(i, n - 1).value, ((i, n - 1),))
        else:
            out = None
            for m in range(i, n - 1):
                cand = chunk(i, m).value + best(m + 1, k - 1)[0]
                if out is None or cand > out[0]:
                    out = (cand, ((i, m),) + best(m + 1, k - 1)[1])
            last = (chunk(i, n - 1).value, ((i, n - 1),))
            if last[0] > out[0]:
                out = last
        memo[key] = out
        return out

    _, intervals = best(0, min(max_pieces, n))
    return intervals, [chunk(i, jx) for i, jx in intervals]


# ---------------------------------------------------------------------------
# norming-set generation
# ---------------------------------------------------------------------------


@dataclass
class WGeneration:
    functionals: List[Functional]
    truncated: bool
    depth: int


def generate_W(
    xi: Ordinal, support_window: Sequence[int], depth: int, budget: int = 200_000
) -> WGeneration:
    """All norming-set functionals up to the given generation depth,
    supported in the window, pruned without lowering any achievable value.

    Prunings (value-safe for the sup over the generated set): averages
    carry the minimal declared size max(2, #children), and inside a sum
    node the declared sizes are re-raised to the minimal values satisfying
    the growth conditions; larger declared sizes only shrink the scaling
    1/size, and the minimal re-declaration dominates any legal one.  The
    generated set is closed under leaf sign flips by construction.

    Generation stops early (truncated=True) if the budget is exceeded.
    """
    window = sorted(set(support_window))
    fam = SchreierFamily(omega_power(xi))
    level: Set[Functional] = set()
    for c in window:
        level.add(Unit(1, c))
        level.add(Unit(-1, c))
    truncated = False

    def successive_sequences(pool: List[Functional]) -> Iterator[Tuple[Functional, ...]]:
        by_min: Dict[int, List[Functional]] = {}
        for f in pool:
            s = functional_support(f)
            by_min.setdefault(s[0], []).append(f)
        mins = sorted(by_min)

        def rec(prev_max: int) -> Iterator[Tuple[Functional, ...]]:
            for mn in mins:
                if mn <= prev_max:
                    continue
                for f in by_min[mn]:
                    fmax = functional_support(f)[-1]
                    yield (f,)
                    for rest in rec(fmax):
                        yield (f,) + rest

        return rec(0)

    current = set(level)
    for _ in range(depth):
        if truncated:
            break
        pool = sorted(current, key=lambda f: (functional_support(f), repr(f)))
        new: Set[Functional] = set()
        for children in successive_sequences(pool):
            if len(new) + len(current) > budget:
                truncated = True
                break
            new.add(Average(max(2, len(children)), children))
        if not truncated:
            averages = sorted(
                (f for f in current | new if isinstance(f, Average)),
                key=lambda f: (functional_support(f), repr(f)),
            )
            for seq in successive_sequences(averages):
                if len(new) + len(current) > budget:
                    truncated = True
                    break
                minima = tuple(functional_support(a)[0] for a in seq)
                if not member(minima, fam).member:
                    continue
                resized: List[Average] = []
                prev_size = 0
                prev_max = 0
                for a in seq:
                    size = max(a.size, prev_size + 1, prev_max + 1)
                    resized.append(Average(size, a.children))
                    prev_size = size
                    prev_max = functional_support(a)[-1]
                new.add(SumNode(tuple(resized)))
        current |= new
    return WGeneration(sorted(current, key=repr), truncated, depth)
