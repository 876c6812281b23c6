"""End-to-end runs over the template corpus with mock guesses."""

import pytest

from asm import Isa
from core.errors import MutationInapplicable
from guess import MutationSpec, mock_guess
from guess.models import Mutation
from pipeline import InterpreterOracle, PipelineConfig, guess_and_sketch, guess_only, samples_used_summary
from semantics import run_program
from helpers import TEMPLATE_OUTPUTS, load_pair, template_names, trials

CONFIG = PipelineConfig(top_k=3)
DIRECTIONS = pytest.mark.parametrize("forward", [True, False], ids=["arm-to-rv", "rv-to-arm"])
SINGLE_SEEDS = trials(4, 20)
PAIRS = (("replace-immediate", "replace-register"), ("replace-register", "replace-register"))

# Corruptions for the inclusion check; the last ones touch blocks the solver cannot handle.
MIXED = (
    MutationSpec.of("replace-immediate"),
    MutationSpec.of("replace-register"),
    MutationSpec.of("swap-mnemonic-within-class"),
    MutationSpec.of("drop-global-definition"),
    MutationSpec.of("rename-label"),
    MutationSpec.of("replace-immediate", "rename-label"),
    MutationSpec((Mutation("replace-register"),), solvable_only=False),
    MutationSpec((Mutation("replace-immediate"), Mutation("replace-register")), solvable_only=False),
)


def _sides(name, forward):
    arm, rv = load_pair(name)
    return (arm, rv) if forward else (rv, arm)


def _guesses(source, truth, kinds, seeds, input_id):
    spec = MutationSpec.of(*kinds)
    return [mock_guess(truth, spec, seed=seed, source=source, input_id=input_id, rank=rank)
            for rank, seed in enumerate(seeds, start=1)]


def _two_in_one_block(source, truth, seed, input_id):
    for kinds in PAIRS:
        try:
            return mock_guess(truth, MutationSpec.of(*kinds, same_block=True), seed=seed, source=source,
                              input_id=input_id)
        except MutationInapplicable:
            continue
    return None


def test_templates_print_the_expected_value():
    for name, value in TEMPLATE_OUTPUTS.items():
        for program in load_pair(name):
            assert run_program(program).stdout == f"{value}\n", (name, program.isa)


@DIRECTIONS
@pytest.mark.parametrize("kind", ["replace-immediate", "replace-register"])
@pytest.mark.parametrize("name", template_names())
def test_single_mutation_is_recovered(name, kind, forward):
    source, truth = _sides(name, forward)
    oracle = InterpreterOracle()
    for seed in range(SINGLE_SEEDS):
        try:
            guesses = _guesses(source, truth, [kind], [seed], name)
        except MutationInapplicable:
            pytest.skip(f"{name} has no solvable {kind} site")
        result = guess_and_sketch(source, guesses, oracle, CONFIG)
        assert result.verified, (name, seed, [r.to_dict() for r in result.repairs])
        assert result.samples_used == 1


def test_single_mutation_sweep_is_large_enough():
    cases = {"replace-immediate": 0, "replace-register": 0}
    for name in template_names():
        for forward in (True, False):
            source, truth = _sides(name, forward)
            for kind in cases:
                try:
                    mock_guess(truth, MutationSpec.of(kind), source=source)
                except MutationInapplicable:
                    continue
                cases[kind] += SINGLE_SEEDS
    assert cases["replace-register"] >= 200
    assert cases["replace-immediate"] > 0


def test_two_mutations_in_one_block():
    oracle = InterpreterOracle()
    attempted, missed = 0, []
    for name in template_names():
        for forward in (True, False):
            source, truth = _sides(name, forward)
            for seed in range(trials(4, 10)):
                guess = _two_in_one_block(source, truth, seed, name)
                if guess is None:
                    continue
                attempted += 1
                if not guess_and_sketch(source, [guess], oracle, CONFIG).verified:
                    missed.append((name, forward, seed))
    assert attempted >= 200
    assert len(missed) <= 0.1 * attempted, missed


@DIRECTIONS
def test_guess_only_verified_is_included(forward):
    oracle = InterpreterOracle()
    both = only_raw = 0
    for name in template_names():
        source, truth = _sides(name, forward)
        for n, spec in enumerate(MIXED):
            guesses = []
            for rank, seed in enumerate((n, n + 50), start=1):
                try:
                    guesses.append(mock_guess(truth, spec, seed=seed, source=source, input_id=name, rank=rank))
                except MutationInapplicable:
                    break
            if not guesses:
                continue
            if n % 2 == 0:
                guesses.append(mock_guess(truth, source=source, input_id=name, rank=len(guesses) + 1))
            only = guess_only(source, guesses, oracle, CONFIG)
            full = guess_and_sketch(source, guesses, oracle, CONFIG)
            if only.verified:
                assert full.verified, (name, spec.to_list())
                both += 1
            elif full.verified:
                only_raw += 1
    assert both > 0
    assert only_raw > 0


@DIRECTIONS
def test_repair_uses_fewer_samples(forward):
    oracle = InterpreterOracle()
    plain, repaired = [], []
    for name in template_names():
        source, truth = _sides(name, forward)
        try:
            guesses = _guesses(source, truth, ["replace-immediate"], [1, 2], name)
        except MutationInapplicable:
            continue
        guesses.append(mock_guess(truth, source=source, input_id=name, rank=3))
        plain.append(guess_only(source, guesses, oracle, CONFIG))
        repaired.append(guess_and_sketch(source, guesses, oracle, CONFIG))
    assert repaired
    assert all(r.verified for r in plain + repaired)
    assert samples_used_summary(repaired) < samples_used_summary(plain)


def test_correct_rank_one_costs_one_sample():
    oracle = InterpreterOracle()
    for name in template_names():
        arm, rv = load_pair(name)
        result = guess_and_sketch(arm, [mock_guess(rv, source=arm, input_id=name)], oracle, CONFIG)
        assert result.verified and result.samples_used == 1, name
        assert not result.repairs


def test_source_language_is_inferred_from_the_program():
    arm, rv = load_pair("add_const")
    result = guess_and_sketch(arm, [mock_guess(rv, source=arm)], InterpreterOracle(), CONFIG)
    assert result.program.isa is Isa.RISCV64
