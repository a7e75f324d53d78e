"""Planted 3-regular 3-XORSAT instances: generation, evaluation, exact solving.

An instance over ``v = n/2`` boolean variables has exactly ``v`` XOR clauses of
three distinct variables each, with every variable appearing in exactly three
clauses.  A uniformly random planted assignment fixes each clause parity, so
the ground state is known by construction.  ``gf2_solve`` recovers the full
solution space by Gaussian elimination over GF(2).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import (
    GenerationStall,
    Inconsistent,
    InvariantViolation,
    LengthMismatch,
    OddSize,
    ParseError,
    TooSmall,
)

_LOCAL_RESHUFFLES = 100   # per offending clause before giving up on this draw
_FULL_RESTARTS = 100      # fresh permutations before declaring a stall


@dataclass(frozen=True)
class XorSatInstance:
    """A 3R3X system: ``triples[c] = (i, j, k)`` with clause parity ``parities[c]``."""

    num_vars: int
    triples: np.ndarray          # (m, 3) int32, m == num_vars
    parities: np.ndarray         # (m,) uint8
    planted: np.ndarray | None   # (num_vars,) uint8 or None
    seed: int
    label: str = field(compare=False, default="")

    @property
    def num_clauses(self) -> int:
        return self.triples.shape[0]

    @property
    def n_spins(self) -> int:
        """Size parameter n of the target Ising model (variables + ancillas)."""
        return 2 * self.num_vars

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, XorSatInstance):
            return NotImplemented
        if self.num_vars != other.num_vars or self.seed != other.seed:
            return False
        if not (np.array_equal(self.triples, other.triples)
                and np.array_equal(self.parities, other.parities)):
            return False
        if (self.planted is None) != (other.planted is None):
            return False
        return self.planted is None or np.array_equal(self.planted, other.planted)

    def validate(self) -> None:
        """Raise InvariantViolation on the first failed structural invariant."""
        v, m = self.num_vars, self.num_clauses
        if m != v:
            raise InvariantViolation(f"clause count {m} != variable count {v}")
        if self.triples.shape != (m, 3):
            raise InvariantViolation("triples array must have shape (m, 3)")
        if m and (self.triples.min() < 0 or self.triples.max() >= v):
            raise InvariantViolation("variable index out of range")
        for c in range(m):
            i, j, k = self.triples[c]
            if i == j or i == k or j == k:
                raise InvariantViolation(f"clause {c} repeats a variable")
        degrees = np.bincount(self.triples.ravel(), minlength=v)
        bad = np.nonzero(degrees != 3)[0]
        if bad.size:
            raise InvariantViolation(
                f"variable {int(bad[0])} appears in {int(degrees[bad[0]])} clauses, not 3")
        if not np.isin(self.parities, (0, 1)).all():
            raise InvariantViolation("parities must be 0/1")
        if self.planted is not None:
            if self.planted.shape != (v,):
                raise InvariantViolation("planted assignment has wrong length")
            if evaluate(self, self.planted) != 0:
                raise InvariantViolation("planted assignment does not satisfy the system")


@dataclass(frozen=True)
class SolutionSpace:
    """Affine solution set: ``particular XOR (any subset-XOR of basis rows)``."""

    particular: np.ndarray        # (num_vars,) uint8
    nullspace_basis: np.ndarray   # (num_vars - rank, num_vars) uint8
    rank: int

    @property
    def num_vars(self) -> int:
        return self.particular.size


def _default_label(num_vars: int, seed: int) -> str:
    return f"3r3x-n{2 * num_vars}-s{seed}"


def generate_3r3x(n_spins: int, seed: int) -> XorSatInstance:
    """Draw a random planted 3R3X instance with ``n_spins/2`` variables.

    Configuration model: three stubs per variable are matched to the 3·m clause
    slots by a random permutation.  Clauses that end up with a repeated
    variable are repaired by re-shuffling the offending stub against a random
    slot elsewhere (bounded retries), falling back to a full re-permutation.
    """
    if n_spins % 2 != 0:
        raise OddSize(f"n_spins must be even, got {n_spins}")
    if n_spins < 8:
        raise TooSmall(f"n_spins must be at least 8, got {n_spins}")
    num_vars = n_spins // 2
    rng = np.random.default_rng(seed)
    for _ in range(_FULL_RESTARTS):
        triples = _try_configuration(num_vars, rng)
        if triples is None:
            continue
        planted = rng.integers(0, 2, size=num_vars, dtype=np.uint8)
        parities = (planted[triples].sum(axis=1) & 1).astype(np.uint8)
        triples.setflags(write=False)
        parities.setflags(write=False)
        planted.setflags(write=False)
        return XorSatInstance(
            num_vars=num_vars,
            triples=triples,
            parities=parities,
            planted=planted,
            seed=seed,
            label=_default_label(num_vars, seed),
        )
    raise GenerationStall(
        f"could not build a 3-regular system for n_spins={n_spins} "
        f"after {_FULL_RESTARTS} restarts")


def _try_configuration(num_vars: int, rng: np.random.Generator) -> np.ndarray | None:
    """One permutation draw plus local repair; None if repair stalls."""
    stubs = np.repeat(np.arange(num_vars, dtype=np.int32), 3)
    slots = rng.permutation(stubs).reshape(num_vars, 3)
    for c in range(num_vars):
        retries = 0
        while _duplicate_position(slots[c]) >= 0:
            if retries >= _LOCAL_RESHUFFLES:
                return None
            retries += 1
            p = _duplicate_position(slots[c])
            c2 = int(rng.integers(num_vars))
            p2 = int(rng.integers(3))
            if c2 == c:
                continue
            slots[c, p], slots[c2, p2] = slots[c2, p2], slots[c, p]
            if _duplicate_position(slots[c2]) >= 0:
                # the swap repaired clause c at clause c2's expense; undo it
                slots[c, p], slots[c2, p2] = slots[c2, p2], slots[c, p]
    return slots


def _duplicate_position(clause: np.ndarray) -> int:
    i, j, k = clause
    if i == j or i == k:
        return 0
    if j == k:
        return 1
    return -1


def evaluate(instance: XorSatInstance, assignment: np.ndarray) -> int:
    """Number of unsatisfied clauses (clause holds iff XOR of its bits == parity)."""
    assignment = np.asarray(assignment)
    if assignment.shape != (instance.num_vars,):
        raise LengthMismatch(
            f"assignment length {assignment.size} != num_vars {instance.num_vars}")
    xors = assignment[instance.triples].sum(axis=1) & 1
    return int((xors != instance.parities).sum())


# --- GF(2) elimination --------------------------------------------------------

@numba.njit(cache=True)
def _rref_inplace(a: np.ndarray) -> np.ndarray:
    """Reduced row echelon form of a dense 0/1 byte matrix, in place.

    Returns pivots: pivots[c] = pivot row of column c, or -1.  Row operations
    are branch-free byte XORs; elimination clears above and below each pivot.
    """
    m, n = a.shape
    pivots = np.full(n, -1, dtype=np.int64)
    row = 0
    for c in range(n):
        p = -1
        for r in range(row, m):
            if a[r, c]:
                p = r
                break
        if p < 0:
            continue
        if p != row:
            for k in range(n):
                t = a[row, k]
                a[row, k] = a[p, k]
                a[p, k] = t
        for r in range(m):
            if r == row:
                continue
            f = a[r, c]
            for k in range(n):
                a[r, k] ^= f & a[row, k]
        pivots[c] = row
        row += 1
        if row == m:
            break
    return pivots


def solve_xor_rows(rows: list[list[int]] | np.ndarray, rhs: np.ndarray | list[int],
                   num_vars: int) -> SolutionSpace:
    """Solve a general XOR system given, per equation, its variable indices.

    This is the elimination core shared by ``gf2_solve`` and hand-built
    systems; raises Inconsistent when no assignment satisfies all equations.
    """
    rhs = np.asarray(rhs, dtype=np.uint8)
    m = len(rows)
    aug = np.zeros((m, num_vars + 1), dtype=np.uint8)
    for r, cols in enumerate(rows):
        for c in cols:
            aug[r, c] ^= 1
        aug[r, num_vars] = rhs[r]
    pivots = _rref_inplace(aug)
    if pivots[num_vars] >= 0:
        raise Inconsistent("augmented rank exceeds coefficient rank")
    pivot_cols = np.nonzero(pivots[:num_vars] >= 0)[0]
    rank = int(pivot_cols.size)
    free_cols = np.nonzero(pivots[:num_vars] < 0)[0]

    particular = np.zeros(num_vars, dtype=np.uint8)
    particular[pivot_cols] = aug[pivots[pivot_cols], num_vars]

    basis = np.zeros((free_cols.size, num_vars), dtype=np.uint8)
    for b, f in enumerate(free_cols):
        basis[b, f] = 1
        basis[b, pivot_cols] = aug[pivots[pivot_cols], f]
    particular.setflags(write=False)
    basis.setflags(write=False)
    return SolutionSpace(particular=particular, nullspace_basis=basis, rank=rank)


def gf2_solve(instance: XorSatInstance) -> SolutionSpace:
    """Exact solution space of an instance via GF(2) Gaussian elimination."""
    return solve_xor_rows(instance.triples, instance.parities, instance.num_vars)


def count_solutions(space: SolutionSpace) -> int:
    """log2 of the number of satisfying assignments (num_vars − rank)."""
    return space.num_vars - space.rank


# --- text format ---------------------------------------------------------------

def serialize(instance: XorSatInstance) -> str:
    """Render the instance in the ``p 3r3x`` text format (LF line endings)."""
    lines = [f"p 3r3x {instance.num_vars} {instance.num_clauses} {instance.seed}"]
    for (i, j, k), b in zip(instance.triples, instance.parities):
        lines.append(f"c {i} {j} {k} {b}")
    if instance.planted is not None:
        lines.append("s " + "".join(str(int(x)) for x in instance.planted))
    return "\n".join(lines) + "\n"


def parse(text: str, label: str | None = None) -> XorSatInstance:
    """Parse and fully validate an instance; inverse of ``serialize``."""
    lines = text.splitlines()
    header = None
    header_line = 0
    for ln, raw in enumerate(lines, start=1):
        if raw.strip() and not raw.lstrip().startswith("#"):
            header, header_line = raw.split(), ln
            break
    if header is None:
        raise ParseError("empty file")
    if len(header) != 5 or header[0] != "p" or header[1] != "3r3x":
        raise ParseError("expected header 'p 3r3x <num_vars> <num_clauses> <seed>'",
                         header_line)
    try:
        num_vars, num_clauses, seed = (int(x) for x in header[2:])
    except ValueError:
        raise ParseError("non-integer field in header", header_line) from None

    triples = np.zeros((num_clauses, 3), dtype=np.int32)
    parities = np.zeros(num_clauses, dtype=np.uint8)
    planted: np.ndarray | None = None
    got = 0
    for ln, raw in enumerate(lines[header_line:], start=header_line + 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if parts[0] == "c":
            if len(parts) != 5:
                raise ParseError("clause line needs 'c <i> <j> <k> <parity>'", ln)
            if got >= num_clauses:
                raise ParseError(
                    f"more clause lines than the declared {num_clauses}", ln)
            try:
                i, j, k, b = (int(x) for x in parts[1:])
            except ValueError:
                raise ParseError("non-integer field in clause line", ln) from None
            if b not in (0, 1):
                raise ParseError(f"parity must be 0 or 1, got {b}", ln)
            triples[got] = (i, j, k)
            parities[got] = b
            got += 1
        elif parts[0] == "s":
            if len(parts) != 2 or not set(parts[1]) <= {"0", "1"}:
                raise ParseError("planted line needs 's <bitstring>'", ln)
            if len(parts[1]) != num_vars:
                raise ParseError(
                    f"planted bitstring length {len(parts[1])} != num_vars {num_vars}", ln)
            planted = np.frombuffer(parts[1].encode(), dtype=np.uint8) - ord("0")
        else:
            raise ParseError(f"unrecognized record '{parts[0]}'", ln)
    if got != num_clauses:
        raise ParseError(f"header declared {num_clauses} clauses but found {got}",
                         len(lines))

    triples.setflags(write=False)
    parities.setflags(write=False)
    if planted is not None:
        planted.setflags(write=False)
    instance = XorSatInstance(
        num_vars=num_vars,
        triples=triples,
        parities=parities,
        planted=planted,
        seed=seed,
        label=label if label is not None else _default_label(num_vars, seed),
    )
    instance.validate()
    return instance


def load(path) -> XorSatInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def save(instance: XorSatInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(instance))
