"""Ising Hamiltonian (fields + pairwise couplings + offset), and the
XORSAT -> Ising quadratization with one ancilla spin per clause.

Each clause (x_i, x_j, x_k | b) contributes the penalty (x_i+x_j+x_k-2a-b)^2
over binaries.  Substituting x = (1-s)/2 gives, with beta = 1-2b:

    P = 2 + (s_i s_j + s_i s_k + s_j s_k)/2 - (beta/2)(s_i+s_j+s_k)
        + beta*s_a - (s_i+s_j+s_k)*s_a

The minimum over the ancilla is 0 for a satisfied clause and exactly 1 for a
violated one, so total energy equals the unsat-clause count and the ground
energy of satisfiable systems is 0.  Spin convention: x = (1-s)/2, i.e. spin
+1 encodes bit 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch, ParseError
from .xorsat import XorSatInstance

SPIN_CONVENTION = "x=(1-s)/2"


@dataclass(frozen=True)
class VariableMap:
    """Where each original variable and each clause ancilla lives in spin space."""

    var_spin: np.ndarray      # (num_vars,) int32
    ancilla_spin: np.ndarray  # (num_clauses,) int32
    convention: str = SPIN_CONVENTION


@dataclass(frozen=True)
class SpinState:
    """Vector of spins in {-1, +1}."""

    spins: np.ndarray  # (n,) int8

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=np.int8)
        if not np.isin(spins, (-1, 1)).all():
            raise ValueError("spins must be +/-1")
        object.__setattr__(self, "spins", spins)

    def __len__(self) -> int:
        return self.spins.size


@dataclass(frozen=True)
class IsingModel:
    """Eq.-1 Hamiltonian H = offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j."""

    n: int
    h: np.ndarray           # (n,) float64
    pairs: np.ndarray       # (k, 2) int32 with pairs[:,0] < pairs[:,1], unique
    weights: np.ndarray     # (k,) float64
    offset: float = 0.0
    source_map: VariableMap | None = field(compare=False, default=None)
    _adjacency: tuple | None = field(compare=False, default=None, repr=False)

    def __post_init__(self):
        if self.h.shape != (self.n,):
            raise LengthMismatch("h length != n")
        if self.pairs.size:
            if self.pairs.min() < 0 or self.pairs.max() >= self.n:
                raise IndexOutOfRange("coupling index out of range")
            if (self.pairs[:, 0] >= self.pairs[:, 1]).any():
                raise ValueError("couplings must satisfy i < j")
            keys = self.pairs[:, 0].astype(np.int64) * self.n + self.pairs[:, 1]
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate coupling pair")

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR form of the symmetrized coupling graph: (indptr, indices, values)."""
        if self._adjacency is None:
            src = np.concatenate([self.pairs[:, 0], self.pairs[:, 1]])
            dst = np.concatenate([self.pairs[:, 1], self.pairs[:, 0]])
            val = np.concatenate([self.weights, self.weights])
            order = np.argsort(src, kind="stable")
            src, dst, val = src[order], dst[order], val[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            object.__setattr__(
                self, "_adjacency",
                (indptr, dst.astype(np.int32), val.astype(np.float64)))
        return self._adjacency

    @property
    def max_abs_coupling(self) -> float:
        return float(np.abs(self.weights).max()) if self.weights.size else 0.0


def optimal_ancilla(bits: tuple[int, int, int] | np.ndarray, parity: int) -> int:
    """Ancilla value minimizing (sum(bits) - 2a - parity)^2; ties resolve to a=1.

    The only tie is sum - parity == 1 (both choices give penalty 1); the rule
    a = 1 iff sum(bits) - parity >= 1 covers the tie and all clear cases.
    """
    return 1 if int(bits[0]) + int(bits[1]) + int(bits[2]) - int(parity) >= 1 else 0


def xorsat_to_ising(instance: XorSatInstance) -> tuple[IsingModel, VariableMap]:
    """Quadratize: n = 2*num_vars spins, one ancilla per clause, unit gap."""
    v = instance.num_vars
    m = instance.num_clauses
    n = 2 * v
    h = np.zeros(n, dtype=np.float64)
    pair_acc: dict[tuple[int, int], float] = {}

    def add_pair(i: int, j: int, val: float) -> None:
        key = (i, j) if i < j else (j, i)
        pair_acc[key] = pair_acc.get(key, 0.0) + val

    offset = 0.0
    for c in range(m):
        i, j, k = (int(x) for x in instance.triples[c])
        beta = 1.0 - 2.0 * float(instance.parities[c])
        a = v + c
        offset += 2.0
        for var in (i, j, k):
            h[var] -= beta / 2.0
            add_pair(var, a, -1.0)
        h[a] += beta
        add_pair(i, j, 0.5)
        add_pair(i, k, 0.5)
        add_pair(j, k, 0.5)

    keys = sorted(pair_acc)
    pairs = np.array(keys, dtype=np.int32).reshape(len(keys), 2)
    weights = np.array([pair_acc[key] for key in keys], dtype=np.float64)
    h.setflags(write=False)
    pairs.setflags(write=False)
    weights.setflags(write=False)
    vmap = VariableMap(
        var_spin=np.arange(v, dtype=np.int32),
        ancilla_spin=np.arange(v, 2 * v, dtype=np.int32),
    )
    model = IsingModel(n=n, h=h, pairs=pairs, weights=weights, offset=offset,
                       source_map=vmap)
    return model, vmap


def _spins_of(state: SpinState | np.ndarray) -> np.ndarray:
    return state.spins if isinstance(state, SpinState) else np.asarray(state)


def energy(model: IsingModel, state: SpinState | np.ndarray) -> float:
    """Exact Eq.-1 energy; integer-valued for quadratized models."""
    s = _spins_of(state)
    if s.shape != (model.n,):
        raise LengthMismatch(f"state length {s.size} != n {model.n}")
    s = s.astype(np.float64)
    pair_term = float(model.weights @ (s[model.pairs[:, 0]] * s[model.pairs[:, 1]]))
    return float(model.offset + model.h @ s + pair_term)


def energy_delta(model: IsingModel, state: SpinState | np.ndarray, flip_index: int) -> float:
    """Energy change from flipping one spin: -2 s_k (h_k + sum_j J_kj s_j)."""
    s = _spins_of(state)
    if not 0 <= flip_index < model.n:
        raise IndexOutOfRange(f"flip index {flip_index} outside [0, {model.n})")
    indptr, indices, values = model.adjacency()
    lo, hi = indptr[flip_index], indptr[flip_index + 1]
    local = model.h[flip_index] + values[lo:hi] @ s[indices[lo:hi]].astype(np.float64)
    return float(-2.0 * s[flip_index] * local)


def encode(assignment: np.ndarray, vmap: VariableMap,
           ancilla_bits: np.ndarray | None = None) -> SpinState:
    """Bits -> spins via s = 1-2x; missing ancilla bits default to 0 (spin +1)."""
    assignment = np.asarray(assignment)
    n = vmap.var_spin.size + vmap.ancilla_spin.size
    spins = np.ones(n, dtype=np.int8)
    spins[vmap.var_spin] = 1 - 2 * assignment.astype(np.int8)
    if ancilla_bits is not None:
        spins[vmap.ancilla_spin] = 1 - 2 * np.asarray(ancilla_bits).astype(np.int8)
    return SpinState(spins)


def encode_ground(instance: XorSatInstance, assignment: np.ndarray,
                  vmap: VariableMap) -> SpinState:
    """Encode an assignment together with its optimal ancilla settings."""
    assignment = np.asarray(assignment)
    ancillas = np.array(
        [optimal_ancilla(assignment[t], p)
         for t, p in zip(instance.triples, instance.parities)],
        dtype=np.int8)
    return encode(assignment, vmap, ancillas)


def decode(state: SpinState | np.ndarray, vmap: VariableMap) -> np.ndarray:
    """Spins -> original variable bits via x = (1-s)/2; ancillas discarded."""
    s = _spins_of(state)
    return ((1 - s[vmap.var_spin]) // 2).astype(np.uint8)


# --- text export ----------------------------------------------------------------

def serialize_ising(model: IsingModel) -> str:
    """Render in the ``p ising`` text format with round-trip float precision."""
    nz = np.nonzero(model.h)[0]
    num_terms = nz.size + model.weights.size
    lines = [f"p ising {model.n} {num_terms}"]
    for i in nz:
        lines.append(f"f {i} {float(model.h[i])!r}")
    for (i, j), w in zip(model.pairs, model.weights):
        lines.append(f"j {i} {j} {float(w)!r}")
    lines.append(f"o {float(model.offset)!r}")
    return "\n".join(lines) + "\n"


def parse_ising(text: str) -> IsingModel:
    """Inverse of ``serialize_ising``."""
    lines = text.splitlines()
    n = None
    declared = 0
    h = None
    pairs: list[tuple[int, int]] = []
    weights: list[float] = []
    offset = 0.0
    terms = 0
    for ln, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        try:
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "ising":
                    raise ParseError("expected 'p ising <n> <num_terms>'", ln)
                n, declared = int(parts[2]), int(parts[3])
                h = np.zeros(n, dtype=np.float64)
            elif parts[0] == "f":
                h[int(parts[1])] = float(parts[2])
                terms += 1
            elif parts[0] == "j":
                pairs.append((int(parts[1]), int(parts[2])))
                weights.append(float(parts[3]))
                terms += 1
            elif parts[0] == "o":
                offset = float(parts[1])
            else:
                raise ParseError(f"unrecognized record '{parts[0]}'", ln)
        except (ValueError, IndexError, TypeError):
            raise ParseError("malformed record", ln) from None
    if n is None:
        raise ParseError("missing 'p ising' header")
    if terms != declared:
        raise ParseError(f"header declared {declared} terms but found {terms}")
    pair_arr = (np.array(pairs, dtype=np.int32).reshape(len(pairs), 2)
                if pairs else np.zeros((0, 2), dtype=np.int32))
    return IsingModel(n=n, h=h, pairs=pair_arr,
                      weights=np.array(weights, dtype=np.float64), offset=offset)


def load_ising(path) -> IsingModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ising(fh.read())


def save_ising(model: IsingModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_ising(model))
