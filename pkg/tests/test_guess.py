import json

import numpy as np
import pytest

from asm import Immediate, Isa, parse_program, print_program, tokenize_program
from blockfinder import SubseqSpan, find_out_of_scope_refs, partition_spans, undefined_refs
from core.errors import ConfigError, EmptyPartition, MutationInapplicable, SchemaError, ShapeError
from guess import (
    Alignment, ErrorFlag, ErrorMask, GuessTuple, MutationSpec, extract_alignment, load_guesses,
    mark_errors, mock_guess, parse_record, project_guess, stochastic_rows, write_guesses,
)
from helpers import corpus_path, load, trials

GAMMA = 0.9


def _record(**overrides):
    record = {
        "schema_version": 1, "input_id": "a", "rank": 1,
        "tokens": ["\tmov", "\tw0, 1\n"], "probs": [1.0, 0.5],
        "attention": {"rows": 2, "cols": 2, "data": [1.0, 0.0, 0.5, 0.5]},
    }
    record.update(overrides)
    return record


def _write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


def test_parse_record():
    guess = parse_record(_record(metadata={"layer": 5}), 0)
    assert guess.text == "\tmov\tw0, 1\n"
    assert guess.attention.shape == (2, 2)
    assert guess.metadata == {"layer": 5}
    assert guess.source_tokens is None
    assert not guess.truncated


@pytest.mark.parametrize("overrides,error", [
    ({"schema_version": 2}, SchemaError),
    ({"rank": 0}, SchemaError),
    ({"rank": "1"}, SchemaError),
    ({"tokens": ["a", 3]}, SchemaError),
    ({"probs": [1.0]}, SchemaError),
    ({"probs": [1.0, 1.5]}, SchemaError),
    ({"attention": {"rows": 3, "cols": 2, "data": [0.5] * 6}}, ShapeError),
    ({"attention": {"rows": 2, "cols": 2, "data": [0.5] * 3}}, ShapeError),
    ({"attention": {"rows": 2, "cols": 2, "data": [0.6, 0.6, 0.5, 0.5]}}, SchemaError),
    ({"attention": {"cols": 2}}, SchemaError),
    ({"source_tokens": ["only one"]}, ShapeError),
    ({"metadata": []}, SchemaError),
])
def test_malformed_records(overrides, error):
    with pytest.raises(error):
        parse_record(_record(**overrides), 4)


def test_missing_field_names_the_record():
    record = _record()
    del record["input_id"]
    with pytest.raises(SchemaError) as info:
        parse_record(record, 7)
    assert "input_id" in str(info.value)


def test_shape_error_is_a_schema_error():
    assert issubclass(ShapeError, SchemaError)


def test_load_guesses_orders_by_rank_and_truncates(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [
        _record(rank=3), _record(rank=1), _record(input_id="b"), _record(rank=2),
    ])
    guesses = load_guesses(path, top_k=2)
    assert [g.rank for g in guesses["a"]] == [1, 2]
    assert [g.rank for g in guesses["b"]] == [1]


def test_repeated_rank_is_rejected(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [_record(), _record()])
    with pytest.raises(SchemaError):
        load_guesses(path)


def test_invalid_json_line(tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text(json.dumps(_record()) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(SchemaError) as info:
        load_guesses(path)
    assert info.value.record_index == 1


def test_written_guesses_load_back(tmp_path, add_const):
    _, rv = add_const
    guess = mock_guess(rv, MutationSpec.of("replace-immediate"), seed=1, input_id="add_const")
    path = tmp_path / "out" / "guesses.jsonl"
    write_guesses(path, [guess])
    (loaded,) = load_guesses(path)["add_const"]
    assert loaded.tokens == guess.tokens
    assert np.allclose(loaded.probs, guess.probs)
    assert np.allclose(loaded.attention, guess.attention)
    assert loaded.source_tokens == guess.source_tokens
    assert loaded.metadata["producer"] == "mock"


def test_mutation_spec_parsing():
    spec = MutationSpec.parse("replace-immediate*2, drop-global-definition=.LC0", same_block=True)
    assert [m.kind for m in spec.mutations] == ["replace-immediate"] * 2 + ["drop-global-definition"]
    assert spec.mutations[2].target == ".LC0"
    assert spec.same_block
    assert MutationSpec.parse("").mutations == ()
    with pytest.raises(ConfigError):
        MutationSpec.parse("flip-bits")
    with pytest.raises(ConfigError):
        MutationSpec.parse("replace-immediate*x")


def test_unmutated_guess_reproduces_the_truth(add_const):
    arm, rv = add_const
    guess = mock_guess(rv, source=arm)
    assert guess.text == print_program(rv)
    assert np.all(guess.probs == 1.0)
    assert guess.attention.shape == (len(tokenize_program(rv)), len(tokenize_program(arm)))
    assert np.allclose(guess.attention.sum(axis=1), 1.0)
    assert guess.metadata == {"producer": "mock", "seed": 0, "mutations": [], "truncated": False}


def test_mock_is_deterministic(add_const):
    _, rv = add_const
    spec = MutationSpec.of("replace-immediate", "replace-register")
    a = mock_guess(rv, spec, seed=5)
    b = mock_guess(rv, spec, seed=5)
    assert a.tokens == b.tokens
    assert np.array_equal(a.probs, b.probs)
    assert np.array_equal(a.attention, b.attention)


def test_replace_immediate_changes_one_token(add_const):
    _, rv = add_const
    for seed in range(trials(10, 100)):
        guess = mock_guess(rv, MutationSpec.of("replace-immediate"), seed=seed)
        weak = guess.probs < GAMMA
        assert weak.sum() == 1
        assert np.all(guess.probs[weak] >= 0.05 * GAMMA)
        candidate = parse_program(guess.text, Isa.RISCV64)
        changed = [(a, b) for a, b in zip(rv.all_lines(), candidate.all_lines()) if a != b]
        assert len(changed) == 1
        before, after = changed[0]
        assert before.mnemonic == after.mnemonic
        assert [type(o) for o in before.operands] == [type(o) for o in after.operands]
        assert any(isinstance(o, Immediate) and o != p for o, p in zip(before.operands, after.operands))


def test_replace_register_changes_one_token(add_const):
    arm, _ = add_const
    guess = mock_guess(arm, MutationSpec.of("replace-register"), seed=2)
    assert (guess.probs < GAMMA).sum() == 1
    candidate = parse_program(guess.text, Isa.ARMV8)
    changed = [(a, b) for a, b in zip(arm.all_lines(), candidate.all_lines()) if a != b]
    assert len(changed) == 1


def test_swap_mnemonic_stays_in_group(add_const):
    _, rv = add_const
    guess = mock_guess(rv, MutationSpec.of("swap-mnemonic-within-class"), seed=3)
    candidate = parse_program(guess.text, Isa.RISCV64)
    changed = [(a, b) for a, b in zip(rv.all_lines(), candidate.all_lines()) if a != b]
    assert len(changed) == 1
    assert changed[0][0].mnemonic != changed[0][1].mnemonic
    assert (guess.probs < GAMMA).sum() == 1


def test_same_block_mutations_share_a_block(add_const):
    _, rv = add_const
    spec = MutationSpec.parse("replace-immediate,replace-register", same_block=True)
    guess = mock_guess(rv, spec, seed=4)
    assert (guess.probs < GAMMA).sum() == 2


def test_dropped_definition_is_silent_but_undefined(add_const):
    arm, _ = add_const
    guess = mock_guess(arm, MutationSpec.parse("drop-global-definition=.LC0"))
    assert np.all(guess.probs == 1.0)
    candidate = parse_program(guess.text, Isa.ARMV8)
    assert ".LC0" not in candidate.globals
    assert {r.ref.name for r in undefined_refs(candidate)} == {".LC0"}


def test_renamed_label(add_const):
    arm, _ = add_const
    guess = mock_guess(arm, MutationSpec.parse("rename-label=compute"), seed=9)
    candidate = parse_program(guess.text, Isa.ARMV8)
    weak = [t.text for t, p in zip(tokenize_program(candidate), guess.probs) if p < GAMMA]
    assert len(weak) == 1 and weak[0].startswith("compute_")


def test_inapplicable_mutation():
    program = load("count_down", Isa.ARMV8)
    with pytest.raises(MutationInapplicable):
        mock_guess(program, MutationSpec.of("drop-global-definition"))


def test_projection_keeps_weak_tokens(add_const):
    arm, rv = add_const
    guess = mock_guess(rv, MutationSpec.of("replace-immediate"), seed=6, source=arm)
    candidate = project_guess(guess, arm, Isa.RISCV64)
    assert candidate.program is not None and candidate.parse_error == ""
    assert len(candidate.tokens) == len(candidate.probs)
    assert (candidate.probs < GAMMA).sum() == 1
    assert candidate.attention.shape == (len(candidate.tokens), len(tokenize_program(arm)))
    assert np.allclose(candidate.attention.sum(axis=1), 1.0)
    assert candidate.rank == 1


def test_projection_takes_the_weakest_overlapping_producer_token():
    text = "\tadd\tw0, w0, 5\n"
    chunks = tuple(text[i:i + 4] for i in range(0, len(text), 4))
    probs = np.array([1.0, 1.0, 1.0, 0.2])
    guess = GuessTuple("x", 1, chunks, probs, np.eye(len(chunks)))
    candidate = project_guess(guess, None, Isa.ARMV8)
    assert [t.text for t in candidate.tokens] == ["add", "w0", "w0", "5"]
    assert list(candidate.probs) == [1.0, 1.0, 1.0, 0.2]


def test_unparsable_guess_becomes_a_failed_candidate():
    guess = GuessTuple("x", 2, ("\tmov\tw0, 1\n", "1bad: nop\n"), np.ones(2), np.eye(2))
    candidate = project_guess(guess, None, Isa.ARMV8)
    assert candidate.program is None
    assert "cannot parse" in candidate.parse_error
    assert candidate.rank == 2


def test_projection_rejects_mismatched_columns(add_const):
    arm, rv = add_const
    tokens = tuple(t.lead + t.text + t.trail for t in tokenize_program(rv))
    attention = np.full((len(tokens), 3), 1 / 3)
    guess = GuessTuple("x", 1, tokens, np.ones(len(tokens)), attention)
    with pytest.raises(ShapeError):
        project_guess(guess, arm, Isa.RISCV64)


def _partition(rng, n_spans):
    spans, start = [], 0
    for i in range(n_spans):
        width = int(rng.integers(1, 7))
        spans.append(SubseqSpan(0, i, i, start, start + width - 1))
        start += width
    return spans, start


@pytest.mark.parametrize("norm", ["frobenius", "sum", "max"])
def test_planted_alignment_is_recovered(norm):
    rng = np.random.default_rng(21)
    total = hits = 0
    for _ in range(trials(50, 1000)):
        inputs, cols = _partition(rng, int(rng.integers(2, 12)))
        outputs, rows = _partition(rng, int(rng.integers(2, 12)))
        planted = [int(rng.integers(len(inputs))) for _ in outputs]
        noise = float(rng.uniform(0, 0.2))
        attention = np.zeros((rows, cols))
        for out, target in zip(outputs, planted):
            src = inputs[target]
            width = src.end_token - src.start_token + 1
            attention[out.start_token:out.end_token + 1, src.start_token:src.end_token + 1] = (1 - noise) / width
        jitter = rng.random((rows, cols))
        attention = stochastic_rows(attention + noise * jitter / jitter.sum(axis=1, keepdims=True))
        alignment = extract_alignment(attention, inputs, outputs, norm)
        total += len(outputs)
        hits += sum(a == b for a, b in zip(alignment.mapping, planted))
    assert hits / total >= 0.99


def test_ties_go_to_the_earliest_span():
    inputs = [SubseqSpan(0, 0, 0, 0, 1), SubseqSpan(0, 1, 1, 2, 3)]
    outputs = [SubseqSpan(0, 0, 0, 0, 0), SubseqSpan(0, 1, 1, 1, 2)]
    alignment = extract_alignment(np.full((3, 4), 0.25), inputs, outputs)
    assert alignment.mapping == (0, 0)
    assert alignment.aligned(1) == inputs[0]
    assert alignment.aligned_to(outputs[1]) == inputs[0]
    assert alignment.span_of_token(2) == 1
    assert alignment.span_of_token(9) is None


def test_alignment_errors():
    spans = [SubseqSpan(0, 0, 0, 0, 1)]
    with pytest.raises(EmptyPartition):
        extract_alignment(np.eye(2), [], spans)
    with pytest.raises(ShapeError):
        extract_alignment(np.eye(1), spans, spans)
    with pytest.raises(ConfigError):
        extract_alignment(np.eye(2), spans, spans, norm="l1")


def test_low_confidence_marking():
    mask = mark_errors(4, [1.0, 0.5, 0.95, 0.89], GAMMA, None, {})
    assert mask.flags == (ErrorFlag.NONE, ErrorFlag.LOW_CONFIDENCE, ErrorFlag.NONE, ErrorFlag.LOW_CONFIDENCE)
    assert mask.flagged() == [1, 3]
    assert mask.any
    assert not mark_errors(2, [1.0, 1.0], GAMMA, None, {}).any


def test_undefined_references_are_marked(add_const):
    arm, _ = add_const
    guess = mock_guess(arm, MutationSpec.parse("drop-global-definition=.LC0"))
    candidate = project_guess(guess, arm, Isa.ARMV8)
    mask = mark_errors(len(candidate.tokens), candidate.probs, GAMMA, None,
                       find_out_of_scope_refs(candidate.program))
    flagged = mask.flagged()
    assert len(flagged) == 2
    assert all(".LC0" in candidate.tokens[i].text for i in flagged)
    assert {mask.flags[i] for i in flagged} == {ErrorFlag.OUT_OF_SCOPE}


def test_reference_to_different_data_is_marked():
    source = load("global_word", Isa.ARMV8)
    text = corpus_path("global_word", Isa.ARMV8).read_text().replace("1234567890123", "1234567890000")
    candidate = parse_program(text, Isa.ARMV8)
    out_spans, in_spans = tuple(partition_spans(candidate)), tuple(partition_spans(source))
    assert len(out_spans) == len(in_spans)
    identity = Alignment(out_spans, in_spans, tuple(range(len(out_spans))), (1.0,) * len(out_spans))
    tokens = tokenize_program(candidate)
    mask = mark_errors(len(tokens), np.ones(len(tokens)), GAMMA, identity,
                       find_out_of_scope_refs(candidate), find_out_of_scope_refs(source), candidate, source)
    assert {tokens[i].text for i in mask.flagged()} == {".LC1", ":lo12:.LC1"}
    same = mark_errors(len(tokens), np.ones(len(tokens)), GAMMA, identity,
                       find_out_of_scope_refs(source), find_out_of_scope_refs(source), source, source)
    assert not same.any


def test_mask_within_a_span():
    mask = ErrorMask((ErrorFlag.NONE, ErrorFlag.LOW_CONFIDENCE, ErrorFlag.OUT_OF_SCOPE, ErrorFlag.NONE))
    span = SubseqSpan(0, 0, 0, 1, 3)
    assert mask.within(span) == {1: ErrorFlag.LOW_CONFIDENCE, 2: ErrorFlag.OUT_OF_SCOPE}
    assert mask.kinds(span) == (ErrorFlag.LOW_CONFIDENCE, ErrorFlag.OUT_OF_SCOPE)
    assert len(mask) == 4


def test_stochastic_rows():
    rows = stochastic_rows(np.array([[2.0, 2.0], [0.0, 0.0], [1.0, 3.0]]))
    assert np.allclose(rows, [[0.5, 0.5], [0.5, 0.5], [0.25, 0.75]])


def test_pair_sources_line_up(add_const):
    arm, rv = add_const
    guess = mock_guess(rv, source=arm)
    assert len(guess.source_tokens) == len(tokenize_program(arm))
    assert "".join(guess.source_tokens) == print_program(arm)
