"""Unit tests for instance generation, GF(2) solving, and the text format."""
import itertools

import numpy as np
import pytest

from xorbench.errors import (
    GenerationStall,
    Inconsistent,
    InvariantViolation,
    LengthMismatch,
    OddSize,
    ParseError,
    TooSmall,
)
from xorbench.xorsat import (
    XorSatInstance,
    count_solutions,
    evaluate,
    generate_3r3x,
    gf2_solve,
    parse,
    serialize,
    solve_xor_rows,
)


# --- generation -----------------------------------------------------------------

def test_generate_shape_and_counts():
    inst = generate_3r3x(32, seed=0)
    assert inst.num_vars == 16
    assert inst.num_clauses == 16
    assert inst.n_spins == 32
    assert inst.triples.shape == (16, 3)
    assert inst.parities.shape == (16,)


def test_generate_three_regular():
    for seed in range(10):
        inst = generate_3r3x(64, seed=seed)
        degrees = np.bincount(inst.triples.ravel(), minlength=inst.num_vars)
        assert (degrees == 3).all()


def test_generate_no_repeated_variable_within_clause():
    for seed in range(10):
        inst = generate_3r3x(48, seed=seed)
        for i, j, k in inst.triples:
            assert len({int(i), int(j), int(k)}) == 3


def test_generate_planted_satisfies():
    for n in (8, 16, 32, 64, 128):
        inst = generate_3r3x(n, seed=n)
        assert evaluate(inst, inst.planted) == 0


def test_generate_deterministic_in_seed():
    a = generate_3r3x(64, seed=42)
    b = generate_3r3x(64, seed=42)
    assert a == b
    c = generate_3r3x(64, seed=43)
    assert a != c


def test_generate_odd_size_rejected():
    with pytest.raises(OddSize):
        generate_3r3x(33, seed=0)


def test_generate_too_small_rejected():
    with pytest.raises(TooSmall):
        generate_3r3x(6, seed=0)
    with pytest.raises((OddSize, TooSmall)):
        generate_3r3x(0, seed=0)


def test_generate_parity_fraction_near_half():
    # Planted parities should be unbiased coin flips in aggregate.
    total = 0
    ones = 0
    for seed in range(40):
        inst = generate_3r3x(128, seed=seed)
        total += inst.num_clauses
        ones += int(inst.parities.sum())
    frac = ones / total
    assert 0.45 <= frac <= 0.55


def test_generate_smallest_size_often_stalls_or_succeeds_validly():
    # n_spins=8 gives 4 variables and 4 clauses; with only 4 variables the
    # repair loop can genuinely stall.  Either outcome is acceptable, but a
    # success must be a valid instance.
    stalls = 0
    for seed in range(20):
        try:
            inst = generate_3r3x(8, seed=seed)
        except GenerationStall:
            stalls += 1
        else:
            inst.validate()
    assert stalls < 20  # at least one success in 20 draws


def test_duplicate_clauses_are_permitted():
    # The configuration model may emit the same triple twice; validate() must
    # not reject such instances.  Construct one directly.
    triples = np.array([[0, 1, 2], [0, 1, 2], [0, 1, 2]], dtype=np.int32)
    parities = np.zeros(3, dtype=np.uint8)
    inst = XorSatInstance(num_vars=3, triples=triples, parities=parities,
                          planted=np.zeros(3, dtype=np.uint8), seed=0)
    inst.validate()  # must not raise


# --- evaluate -------------------------------------------------------------------

def test_evaluate_counts_violations():
    triples = np.array([[0, 1, 2], [0, 1, 2], [0, 1, 2]], dtype=np.int32)
    parities = np.array([0, 1, 0], dtype=np.uint8)
    inst = XorSatInstance(num_vars=3, triples=triples, parities=parities,
                          planted=None, seed=0)
    # x = (0,0,0): XOR of each clause = 0; violated iff parity == 1.
    assert evaluate(inst, np.zeros(3, dtype=np.uint8)) == 1
    # x = (1,0,0): XOR = 1; violated iff parity == 0.
    assert evaluate(inst, np.array([1, 0, 0], dtype=np.uint8)) == 2


def test_evaluate_length_mismatch():
    inst = generate_3r3x(16, seed=1)
    with pytest.raises(LengthMismatch):
        evaluate(inst, np.zeros(inst.num_vars + 1, dtype=np.uint8))


# --- validate -------------------------------------------------------------------

def _valid_base():
    return generate_3r3x(32, seed=5)


def test_validate_rejects_variable_in_four_clauses():
    base = _valid_base()
    triples = base.triples.copy()
    # Find a slot holding some variable other than the one in triples[0, 0] and
    # overwrite it, giving triples[0, 0]'s variable four appearances.  Keep the
    # clause free of internal repeats by picking a clause not containing it.
    v = int(triples[0, 0])
    target = None
    for c in range(1, triples.shape[0]):
        if v not in triples[c]:
            target = c
            break
    assert target is not None
    triples[target, 0] = v
    if triples[target, 0] in (triples[target, 1], triples[target, 2]):
        pytest.skip("could not build a clean 4-appearance example")
    inst = XorSatInstance(num_vars=base.num_vars, triples=triples,
                          parities=base.parities, planted=None, seed=0)
    with pytest.raises(InvariantViolation):
        inst.validate()


def test_validate_rejects_repeated_variable_in_clause():
    base = _valid_base()
    triples = base.triples.copy()
    triples[0, 1] = triples[0, 0]
    inst = XorSatInstance(num_vars=base.num_vars, triples=triples,
                          parities=base.parities, planted=None, seed=0)
    with pytest.raises(InvariantViolation):
        inst.validate()


def test_validate_rejects_unsatisfied_planted():
    base = _valid_base()
    bad = base.planted.copy()
    bad[0] ^= 1
    if evaluate(base, bad) == 0:
        pytest.skip("flip landed in the solution space")
    inst = XorSatInstance(num_vars=base.num_vars, triples=base.triples,
                          parities=base.parities, planted=bad, seed=base.seed)
    with pytest.raises(InvariantViolation):
        inst.validate()


def test_validate_rejects_clause_count_mismatch():
    base = _valid_base()
    inst = XorSatInstance(num_vars=base.num_vars + 1, triples=base.triples,
                          parities=base.parities, planted=None, seed=0)
    with pytest.raises(InvariantViolation):
        inst.validate()


# --- GF(2) ----------------------------------------------------------------------

def _brute_force_solutions(inst: XorSatInstance) -> list[tuple[int, ...]]:
    sols = []
    for bits in itertools.product((0, 1), repeat=inst.num_vars):
        if evaluate(inst, np.array(bits, dtype=np.uint8)) == 0:
            sols.append(bits)
    return sols


def test_gf2_counts_match_exhaustive_enumeration():
    for n in (8, 12, 16, 24, 32):
        for seed in (0, 1, 2):
            try:
                inst = generate_3r3x(n, seed=seed)
            except GenerationStall:
                continue
            space = gf2_solve(inst)
            brute = _brute_force_solutions(inst)
            assert len(brute) == 2 ** count_solutions(space)
            # the particular solution and the planted one are both in the set
            assert tuple(int(x) for x in space.particular) in brute
            assert tuple(int(x) for x in inst.planted) in brute


def test_gf2_every_basis_combination_satisfies():
    inst = generate_3r3x(24, seed=9)
    space = gf2_solve(inst)
    k = space.nullspace_basis.shape[0]
    for mask in range(2 ** k):
        x = space.particular.copy()
        for b in range(k):
            if (mask >> b) & 1:
                x = x ^ space.nullspace_basis[b]
        assert evaluate(inst, x) == 0


def test_solve_xor_rows_inconsistent():
    # x0 ^ x1 = 0 and x0 ^ x1 = 1 cannot both hold.
    with pytest.raises(Inconsistent):
        solve_xor_rows([[0, 1], [0, 1]], [0, 1], num_vars=2)


def test_solve_xor_rows_simple_chain():
    # x0 = 1, x0 ^ x1 = 1  =>  x0 = 1, x1 = 0, unique solution.
    space = solve_xor_rows([[0], [0, 1]], [1, 1], num_vars=2)
    assert space.rank == 2
    assert count_solutions(space) == 0
    assert space.particular.tolist() == [1, 0]


def test_planted_instances_always_consistent():
    for seed in range(20):
        inst = generate_3r3x(64, seed=seed)
        space = gf2_solve(inst)
        assert evaluate(inst, space.particular) == 0


# --- text format ----------------------------------------------------------------

def test_serialize_parse_round_trip():
    for seed in range(25):
        inst = generate_3r3x(48, seed=seed)
        again = parse(serialize(inst))
        assert again == inst
        assert again.label == inst.label


def test_serialize_is_deterministic_bytes():
    a = serialize(generate_3r3x(32, seed=7))
    b = serialize(generate_3r3x(32, seed=7))
    assert a == b
    assert a.endswith("\n")
    assert "\r" not in a


def test_parse_skips_comments_and_blank_lines():
    inst = generate_3r3x(16, seed=3)
    text = serialize(inst)
    lines = text.splitlines()
    sprinkled = ["# header comment", "", lines[0], "  # indented comment"]
    sprinkled += lines[1:]
    assert parse("\n".join(sprinkled) + "\n") == inst


def test_parse_declared_vs_found_mismatch():
    inst = generate_3r3x(32, seed=11)
    lines = serialize(inst).splitlines()
    # drop one clause line: declares 16, provides 15
    clause_lines = [i for i, ln in enumerate(lines) if ln.startswith("c ")]
    del lines[clause_lines[-1]]
    with pytest.raises(ParseError):
        parse("\n".join(lines) + "\n")


def test_parse_rejects_bad_header():
    with pytest.raises(ParseError):
        parse("p cnf 3 3 0\n")
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("p 3r3x 3 3\n")  # missing seed field


def test_parse_rejects_bad_parity():
    text = "p 3r3x 3 3 0\nc 0 1 2 0\nc 0 1 2 2\nc 0 1 2 0\n"
    with pytest.raises(ParseError):
        parse(text)


def test_parse_rejects_unknown_record():
    text = "p 3r3x 3 3 0\nc 0 1 2 0\nc 0 1 2 0\nc 0 1 2 0\nq what\n"
    with pytest.raises(ParseError):
        parse(text)


def test_parse_validates_structure():
    # Variable 0 appears four times; parse() must run full validation.
    text = ("p 3r3x 4 4 0\n"
            "c 0 1 2 0\n"
            "c 0 1 3 0\n"
            "c 0 2 3 0\n"
            "c 0 1 2 0\n")
    with pytest.raises(InvariantViolation):
        parse(text)


def test_parse_planted_length_checked():
    text = "p 3r3x 3 3 0\nc 0 1 2 0\nc 0 1 2 0\nc 0 1 2 0\ns 01\n"
    with pytest.raises(ParseError):
        parse(text)


def test_instances_without_planted_round_trip():
    inst = generate_3r3x(16, seed=2)
    stripped = XorSatInstance(num_vars=inst.num_vars, triples=inst.triples,
                              parities=inst.parities, planted=None,
                              seed=inst.seed, label=inst.label)
    again = parse(serialize(stripped))
    assert again.planted is None
    assert again == stripped
