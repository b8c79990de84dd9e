"""Cellular cohomology over Z and R via Smith normal form.

Cochain differentials are transposes of the boundary matrices:
delta_k = (boundary_{k+1})^T : C^k -> C^{k+1}.  Boundary matrices are stored
with rows indexed by (k-1)-cells and columns by k-cells.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import _linalg


class CohomologyError(ValueError):
    pass


@dataclass
class SmithDecomposition:
    """U A V = D with U, V unimodular and D diagonal with d1 | d2 | ..."""

    U: list
    V: list
    D: list
    diagonal: list

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def _copy(a):
    return [list(r) for r in a]


def smith_normal_form(a) -> SmithDecomposition:
    """Integer Smith normal form with pivoting on the smallest absolute entry."""
    A = [[int(x) for x in row] for row in a]
    n = len(A)
    m = len(A[0]) if n else 0
    U = _linalg.identity(n)
    V = _linalg.identity(m)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, f):  # row_dst += f * row_src
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, f):
        for r in A:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    t = 0
    while t < min(n, m):
        # smallest nonzero entry in the remaining block
        best = None
        for i in range(t, n):
            for j in range(t, m):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, n):
                if A[i][t]:
                    add_row(t, i, -(A[i][t] // p))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, m):
                if A[t][j]:
                    add_col(t, j, -(A[t][j] // p))
                    if A[t][j]:
                        dirty = True
            if dirty:
                # a remainder is smaller than the pivot: move it into place
                best = None
                for i in range(t, n):
                    if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                        best = (abs(A[i][t]), i, t)
                for j in range(t, m):
                    if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                        best = (abs(A[t][j]), t, j)
                _, i, j = best
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # divisibility: pivot must divide the rest of the block
            bad = None
            for i in range(t + 1, n):
                for j in range(t + 1, m):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diagonal = [A[i][i] for i in range(min(n, m))]
    return SmithDecomposition(U, V, A, diagonal)


def verify_smith(a, snf: SmithDecomposition) -> bool:
    a = [[int(x) for x in r] for r in a]
    if not a or not a[0]:
        return True
    if _linalg.matmul(_linalg.matmul(snf.U, a), snf.V) != snf.D:
        return False
    n, m = len(a), len(a[0])
    for i in range(n):
        for j in range(m):
            if i != j and snf.D[i][j] != 0:
                return False
    d = snf.diagonal
    for x, y in zip(d, d[1:]):
        if x == 0 and y != 0:
            return False
        if x and y % x:
            return False
    return abs(_det(snf.U)) == 1 and abs(_det(snf.V)) == 1


def _det(a) -> Fraction:
    m = [[Fraction(x) for x in r] for r in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


@dataclass
class CohomologyGroups:
    """Per degree: free rank and torsion coefficients (Z) or rank only (R)."""

    coefficients: str
    ranks: list
    torsion: list = field(default_factory=list)
    euler_characteristic: int = 0

    def describe(self, k: int) -> str:
        parts = []
        if self.ranks[k]:
            parts.append("Z" if self.ranks[k] == 1 else f"Z^{self.ranks[k]}")
        for t in self.torsion[k] if self.torsion else []:
            parts.append(f"Z/{t}")
        if self.coefficients == "R":
            return "0" if not self.ranks[k] else ("R" if self.ranks[k] == 1 else f"R^{self.ranks[k]}")
        return " + ".join(parts) if parts else "0"

    def to_json(self):
        out = {}
        for k, r in enumerate(self.ranks):
            entry = {"rank": r}
            if self.coefficients == "Z":
                entry["torsion"] = list(self.torsion[k])
            out[str(k)] = entry
        return out


def check_boundaries(counts, boundaries):
    """``boundaries[k]`` is the matrix of the k-th boundary (k >= 1)."""
    top = len(counts) - 1
    for k in range(1, top + 1):
        b = boundaries[k]
        if counts[k] and counts[k - 1]:
            if len(b) != counts[k - 1] or any(len(r) != counts[k] for r in b):
                raise CohomologyError(f"boundary {k} has wrong shape")
    for k in range(2, top + 1):
        if not (counts[k] and counts[k - 1] and counts[k - 2]):
            continue
        prod = _linalg.matmul(boundaries[k - 1], boundaries[k])
        if any(any(x != 0 for x in r) for r in prod):
            raise CohomologyError(f"boundary of boundary is nonzero in degree {k}")


def _rank_over_q(mat) -> int:
    if not mat or not mat[0]:
        return 0
    return _linalg.rank([[Fraction(x) for x in r] for r in mat])


def cohomology(cx, coefficients: str = "Z") -> CohomologyGroups:
    """Cohomology of a cell complex with integer boundary matrices.

    ``cx`` needs ``counts`` (cells per dimension) and ``boundaries`` with
    ``boundaries[k]`` of shape counts[k-1] x counts[k].
    """
    counts = list(cx.counts)
    bds = cx.boundaries
    check_boundaries(counts, bds)
    top = len(counts) - 1
    if coefficients not in ("Z", "R"):
        raise CohomologyError("coefficients must be 'Z' or 'R'")
    ranks_b = [0] * (top + 2)  # rank of boundary_k
    factors = [[] for _ in range(top + 2)]
    for k in range(1, top + 1):
        b = bds[k]
        if not (counts[k] and counts[k - 1]):
            continue
        if coefficients == "Z":
            snf = smith_normal_form(b)
            if not verify_smith(b, snf):
                raise CohomologyError("Smith normal form recomposition failed")
            ranks_b[k] = snf.rank
            factors[k] = [d for d in snf.diagonal if d > 1]
        else:
            ranks_b[k] = _rank_over_q(b)
    ranks = []
    torsion = []
    for k in range(top + 1):
        # dim ker delta_k - rank delta_{k-1}; delta_k = boundary_{k+1}^T
        ranks.append(counts[k] - ranks_b[k + 1] - ranks_b[k])
        # torsion of H^k is the torsion of coker delta_{k-1}, i.e. of boundary_k
        torsion.append(factors[k] if coefficients == "Z" else [])
    chi = sum((-1) ** k * c for k, c in enumerate(counts))
    groups = CohomologyGroups(coefficients, ranks, torsion if coefficients == "Z" else [], chi)
    if sum((-1) ** k * r for k, r in enumerate(ranks)) != chi:
        raise CohomologyError("Euler characteristic mismatch")
    return groups


# -- induced maps ------------------------------------------------------------


def _integer_kernel_basis(delta):
    """Z-basis of the kernel of an integer matrix (columns of V past the rank)."""
    snf = smith_normal_form(delta)
    r = snf.rank
    m = len(delta[0]) if delta else 0
    return [[snf.V[i][j] for i in range(m)] for j in range(r, m)]


def _solve_exact(columns, target):
    """Rational solution c of sum_j c_j columns[j] = target (must exist)."""
    n = len(target)
    if not columns:
        if any(target):
            raise CohomologyError("vector is not in the span")
        return []
    rows = [[Fraction(columns[j][i]) for j in range(len(columns))] + [Fraction(target[i])]
            for i in range(n)]
    red, piv = _linalg.rref(rows, len(columns) + 1)
    if len(columns) in piv:
        raise CohomologyError("vector is not in the span")
    sol = [Fraction(0)] * len(columns)
    for r, c in zip(red, piv):
        sol[c] = r[-1]
    return sol


def _inverse_unimodular(u):
    n = len(u)
    rows = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
            for i, r in enumerate(u)]
    red, _ = _linalg.rref(rows, n)
    return [[int(x) for x in r[n:]] for r in red]


def _free_cohomology_basis(counts, bds, k):
    """Z-basis of H^k modulo torsion, adapted to the coboundary lattice.

    Returns integer cocycles representing the basis and a function sending a
    cocycle to its integer coordinates in that basis.
    """
    n = counts[k]
    if n == 0:
        return [], lambda z: []
    has_next = k + 1 < len(counts) and counts[k + 1]
    if has_next:
        kernel = _integer_kernel_basis(_linalg.transpose(bds[k + 1]))
    else:
        kernel = [[int(i == j) for i in range(n)] for j in range(n)]
    p = len(kernel)
    if p == 0:
        return [], lambda z: []
    coboundaries = []
    if k >= 1 and counts[k - 1]:
        coboundaries = [list(col) for col in zip(*_linalg.transpose(bds[k]))]
    coords = [[int(x) for x in _solve_exact(kernel, c)] for c in coboundaries]
    if coords:
        b = [[coords[j][i] for j in range(len(coords))] for i in range(p)]
        snf = smith_normal_form(b)
        u, r = snf.U, snf.rank
    else:
        u, r = _linalg.identity(p), 0
    u_inv = _inverse_unimodular(u)
    # new basis of the kernel lattice: K U^-1; its first r vectors carry coboundaries
    new_basis = [[sum(kernel[a][i] * u_inv[a][c] for a in range(p)) for i in range(n)]
                 for c in range(p)]
    free = new_basis[r:]

    def coordinates(cocycle):
        c = _solve_exact(kernel, cocycle)
        if any(x.denominator != 1 for x in c):
            raise CohomologyError("integer cocycle has non-integral kernel coordinates")
        cp = [sum(u[i][j] * c[j] for j in range(p)) for i in range(p)]
        return [int(x) for x in cp[r:]]

    return free, coordinates


def pullback_map(source, target, chain_maps, coefficients: str = "Z"):
    """Matrices of the induced map f^*: H^k(target) -> H^k(source) on free parts.

    ``chain_maps[k]`` is the integer matrix of f_k : C_k(source) -> C_k(target)
    (rows indexed by target k-cells).  The map must commute with boundaries.
    Returns a list of matrices, one per degree, in the free cohomology bases
    (rows: source basis, columns: target basis).
    """
    top = min(len(source.counts), len(target.counts)) - 1
    for k in range(top + 1):
        f = chain_maps[k]
        if len(f) != target.counts[k] or any(len(r) != source.counts[k] for r in f):
            raise CohomologyError(f"chain map in degree {k} has wrong shape")
        entries_ok = all(x == int(x) for r in f for x in r)
        if not entries_ok:
            raise CohomologyError("chain map entries must be integers")
    for k in range(1, top + 1):
        if not (source.counts[k] and target.counts[k - 1]):
            continue
        left = _linalg.matmul(chain_maps[k - 1], source.boundaries[k]) if source.counts[k - 1] else \
            [[0] * source.counts[k] for _ in range(target.counts[k - 1])]
        right = _linalg.matmul(target.boundaries[k], chain_maps[k]) if target.counts[k] else \
            [[0] * source.counts[k] for _ in range(target.counts[k - 1])]
        if left != right:
            raise CohomologyError(f"map is not a chain map in degree {k}")
    result = []
    for k in range(top + 1):
        tb, _ = _free_cohomology_basis(target.counts, target.boundaries, k)
        sb, scoords = _free_cohomology_basis(source.counts, source.boundaries, k)
        f = chain_maps[k]
        cols = []
        for z in tb:
            # pulled back cochain: z o f_k, i.e. f_k^T z
            pulled = [sum(f[i][j] * z[i] for i in range(len(z))) for j in range(source.counts[k])]
            cols.append(scoords(pulled))
        mat = [[cols[c][r] for c in range(len(cols))] for r in range(len(sb))]
        result.append(mat)
    return result


def is_isomorphism(matrices) -> bool:
    for m in matrices:
        if len(m) != (len(m[0]) if m else 0):
            if m and m[0]:
                return False
            continue
        if m and abs(_det(m)) != 1:
            return False
    return True


# -- periodic tilings ----------------------------------------------------------


def pe_cohomology_periodic(t, n: int = 1, coefficients: str = "Z"):
    """Cohomology of the level-n Gahler complex of a periodic fragment.

    Periodicity is checked by requiring the same number of collared classes
    at every level 0..n+1; the answer is then recomputed at level n+1 and
    must agree.  Returns (groups, report).
    """
    from .complex import TruncationError, collared_prototiles, gahler_complex

    counts = []
    try:
        for level in range(n + 2):
            counts.append(len(collared_prototiles(t, level)[0]))
    except TruncationError as exc:
        raise CohomologyError(f"fragment too small to check periodicity: {exc}") from exc
    if len(set(counts)) != 1:
        raise CohomologyError(
            f"collared class counts {counts} are not constant: input is not periodic")
    groups = cohomology(gahler_complex(t, n)[0], coefficients)
    check = cohomology(gahler_complex(t, n + 1)[0], coefficients)
    stable = groups.ranks == check.ranks and groups.torsion == check.torsion
    if not stable:
        raise CohomologyError(f"cohomology changes between levels {n} and {n + 1}")
    return groups, {"class_counts": counts, "stable_levels": [n, n + 1]}
