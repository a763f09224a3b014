from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discourse_reward.classifier import ClassifierModel, TrainConfig
from discourse_reward.errors import (
    EmptyDocument,
    IndexOutOfRange,
    MissingDependency,
    NegativeScore,
)
from discourse_reward.evaluator import (
    EvaluatorClient,
    EvaluatorClientConfig,
    EvaluatorScores,
    ScriptedTransport,
)
from discourse_reward.rewards import (
    DENSE_DENOM_MOTIF,
    MODE_BLENDED,
    MODE_GRAPH,
    MODE_SURFACE,
    LengthPenaltyConfig,
    RewardEngine,
    RewardRequest,
    apply_length_penalty,
    assemble,
)

from fixtures import make_document


# --- apply_length_penalty ---------------------------------------------------------


def test_penalty_worked_example():
    cfg = LengthPenaltyConfig(alpha=0.5, desired_length=1000)
    assert apply_length_penalty(4.0, 600, cfg) == pytest.approx(3.2, abs=1e-12)


def test_penalty_identity_when_long_enough():
    cfg = LengthPenaltyConfig(alpha=0.7, desired_length=100)
    assert apply_length_penalty(2.5, 100, cfg) == 2.5
    assert apply_length_penalty(2.5, 500, cfg) == 2.5


def test_penalty_full_shortfall():
    cfg = LengthPenaltyConfig(alpha=1.0, desired_length=50)
    assert apply_length_penalty(3.0, 0, cfg) == 0.0


def test_penalty_rejects_negative_score():
    cfg = LengthPenaltyConfig(alpha=0.5, desired_length=10)
    with pytest.raises(NegativeScore):
        apply_length_penalty(-0.1, 5, cfg)


def test_penalty_config_validation():
    with pytest.raises(ValueError):
        LengthPenaltyConfig(alpha=1.5, desired_length=10)
    with pytest.raises(ValueError):
        LengthPenaltyConfig(alpha=0.5, desired_length=0)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=10.0),
    st.integers(min_value=0, max_value=4000),
    st.integers(min_value=0, max_value=4000),
    st.integers(min_value=1, max_value=2000),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_penalty_monotone_in_response_length(score, l_r1, l_r2, l_d, alpha):
    cfg = LengthPenaltyConfig(alpha=alpha, desired_length=l_d)
    lo, hi = sorted((l_r1, l_r2))
    assert apply_length_penalty(score, lo, cfg) <= apply_length_penalty(score, hi, cfg) + 1e-15


# --- assemble ------------------------------------------------------------------------


def test_assemble_worked_example():
    tensor = assemble(3.2, {2, 3, 5, 8}, 10)
    expected_unit = 1.0 / 20
    assert tensor.rewards[2] == expected_unit
    assert tensor.rewards[3] == expected_unit
    assert tensor.rewards[5] == expected_unit
    assert tensor.rewards[8] == expected_unit
    assert math.fsum(v for _i, v in tensor.dense) == 4 * expected_unit == 0.2
    assert tensor.rewards[9] == 3.2
    assert tensor.dense_count == 4
    assert tensor.episodic_index == 9


def test_assemble_empty_motif_set():
    tensor = assemble(1.5, frozenset(), 4)
    assert tensor.rewards.tolist() == [0.0, 0.0, 0.0, 1.5]
    assert tensor.dense == ()


def test_assemble_all_tokens_half():
    tensor = assemble(0.0, set(range(8)), 8)
    assert math.fsum(v for _i, v in tensor.dense) == 0.5


def test_assemble_episodic_stacks_on_dense_at_last_index():
    tensor = assemble(1.0, {3}, 4)
    assert tensor.rewards[3] == 1.0 + 1.0 / 8
    assert tensor.dense == ((3, 1.0 / 8),)
    assert tensor.episodic == 1.0


def test_assemble_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        assemble(1.0, {4}, 4)
    with pytest.raises(IndexOutOfRange):
        assemble(1.0, {-1}, 4)


def test_assemble_needs_positive_n():
    with pytest.raises(EmptyDocument):
        assemble(1.0, set(), 0)


def test_dense_conservation_randomized():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(1, 2048))
        k = int(rng.integers(0, n + 1))
        indices = set(map(int, rng.choice(n, size=k, replace=False)))
        tensor = assemble(float(rng.uniform(0, 5)), indices, n)
        dense_sum = math.fsum(v for _i, v in tensor.dense)
        assert dense_sum == k * (1.0 / (2 * n))
        assert dense_sum <= 0.5


# --- compute_rewards -----------------------------------------------------------------


def model_with_bias(bias: float, width: int, fingerprint: str) -> ClassifierModel:
    return ClassifierModel(
        weights=np.zeros(width),
        bias=bias,
        vocab_fingerprint=fingerprint,
        config=TrainConfig(),
    )


def surface_client(replies, retries=2) -> EvaluatorClient:
    config = EvaluatorClientConfig(endpoint="http://unused.invalid/", max_retries=retries)
    return EvaluatorClient(config, transport=ScriptedTransport(replies))


def test_graph_mode_composition(corpus_bundle):
    _h, _m, dset, _hc, _mc, _model = corpus_bundle
    # zero-weight model with bias = logit(0.9) so p_human = 0.9
    bias = math.log(9.0)
    model = model_with_bias(bias, len(dset.vocabulary) + 1, dset.fingerprint)
    doc = make_document("g", shape="chain", n_edus=2)  # no distinctive motifs
    n = doc.token_count
    engine = RewardEngine(motif_set=dset, model=model, alpha=0.5)
    tensor, diag = engine.compute_rewards(
        RewardRequest(text=doc.source_text, desired_length=n, mode=MODE_GRAPH, document=doc)
    )
    p = 1.0 / (1.0 + math.exp(-bias))
    assert tensor.rewards[-1] == p
    assert np.all(tensor.rewards[:-1] == 0.0)
    assert abs(p - 0.9) < 1e-12
    assert diag["p_human"] == p
    assert diag["mode"] == MODE_GRAPH
    assert diag["dense_count"] == 0


def test_graph_mode_dense_rewards_present(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("h", shape="joint", n_edus=4)
    engine = RewardEngine(motif_set=dset, model=model, alpha=0.0)
    tensor, diag = engine.compute_rewards(
        RewardRequest(text=doc.source_text, desired_length=doc.token_count, mode=MODE_GRAPH, document=doc)
    )
    assert diag["dense_count"] > 0
    unit = 1.0 / (2 * doc.token_count)
    assert all(v == unit for _i, v in tensor.dense)
    assert diag["p_human"] > 0.9
    assert diag["distinctive_motifs"] > 0
    assert diag["total_motifs"] >= diag["distinctive_motifs"]


def test_surface_mode_composition(corpus_bundle):
    _h, _m, dset, _hc, _mc, _model = corpus_bundle
    doc = make_document("s", shape="joint", n_edus=4)
    client = surface_client([EvaluatorScores(4, 3, 5).render()])
    engine = RewardEngine(motif_set=dset, evaluator_client=client, alpha=0.5)
    tensor, diag = engine.compute_rewards(
        RewardRequest(
            text=doc.source_text,
            desired_length=doc.token_count,
            mode=MODE_SURFACE,
            instruction="Write about rivers.",
            document=doc,
        )
    )
    assert diag["raw_score"] == 4.0
    assert tensor.episodic == 4.0  # no shortfall
    assert diag["surface_raw"] == {"flow": 4, "organization": 3, "balance": 5}
    # dense motif rewards also present in surface mode when a parse is supplied
    assert diag["dense_count"] > 0


def test_surface_mode_applies_length_penalty():
    client = surface_client([EvaluatorScores(4, 4, 4).render()])
    engine = RewardEngine(evaluator_client=client, alpha=0.5)
    text = "Short answer here."
    tensor, diag = engine.compute_rewards(
        RewardRequest(text=text, desired_length=8, mode=MODE_SURFACE, instruction="I")
    )
    # 4 tokens of 8 desired: penalty multiplier 1 - 0.5 * 0.5 = 0.75
    assert diag["n_tokens"] == 4
    assert tensor.episodic == pytest.approx(3.0, abs=1e-12)
    assert diag["dense_count"] == 0  # no parse, no motif rewards


def test_graph_mode_requires_parse():
    engine = RewardEngine(motif_set=None, model=None)
    with pytest.raises(MissingDependency):
        engine.compute_rewards(RewardRequest(text="abc", desired_length=5, mode=MODE_GRAPH))


def test_graph_mode_uses_parse_provider(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    canned = make_document("prov", shape="joint", n_edus=4)

    def provider(text, tokens):
        assert text == canned.source_text
        return canned

    engine = RewardEngine(motif_set=dset, model=model, alpha=0.0, parse_provider=provider)
    tensor, diag = engine.compute_rewards(
        RewardRequest(text=canned.source_text, desired_length=10, mode=MODE_GRAPH)
    )
    direct = RewardEngine(motif_set=dset, model=model, alpha=0.0).compute_rewards(
        RewardRequest(
            text=canned.source_text, desired_length=10, mode=MODE_GRAPH, document=canned
        )
    )[0]
    assert np.array_equal(tensor.rewards, direct.rewards)
    assert diag["segment_count"] == 1


def test_document_tokens_win_over_request_tokens(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("tok", shape="chain", n_edus=2)
    from discourse_reward.segmentation import token_sequence_from_offsets

    coarse = token_sequence_from_offsets(doc.source_text, [[0, len(doc.source_text)]])
    engine = RewardEngine(motif_set=dset, model=model, alpha=0.0)
    _tensor, diag = engine.compute_rewards(
        RewardRequest(
            text=doc.source_text,
            desired_length=5,
            mode=MODE_GRAPH,
            tokens=coarse,
            document=doc,
        )
    )
    assert diag["n_tokens"] == doc.token_count  # not 1


def test_surface_mode_requires_instruction(corpus_bundle):
    _h, _m, dset, _hc, _mc, _model = corpus_bundle
    client = surface_client([EvaluatorScores(4, 4, 4).render()])
    engine = RewardEngine(motif_set=dset, evaluator_client=client)
    doc = make_document("x", shape="chain", n_edus=2)
    with pytest.raises(MissingDependency):
        engine.compute_rewards(
            RewardRequest(text=doc.source_text, desired_length=4, mode=MODE_SURFACE, document=doc)
        )


def test_mode_isolation(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("iso", shape="joint", n_edus=4)
    request = RewardRequest(
        text=doc.source_text, desired_length=doc.token_count, mode=MODE_GRAPH, document=doc
    )
    bare = RewardEngine(motif_set=dset, model=model)
    with_evaluator = RewardEngine(
        motif_set=dset,
        model=model,
        evaluator_client=surface_client(["garbage that would break parsing"]),
    )
    t1, _ = bare.compute_rewards(request)
    t2, _ = with_evaluator.compute_rewards(request)
    assert np.array_equal(t1.rewards, t2.rewards)

    surface_request = RewardRequest(
        text=doc.source_text,
        desired_length=doc.token_count,
        mode=MODE_SURFACE,
        instruction="I",
        document=doc,
    )
    client_replies = [EvaluatorScores(2, 2, 2).render()]
    no_model = RewardEngine(motif_set=dset, evaluator_client=surface_client(client_replies))
    with_model = RewardEngine(
        motif_set=dset, model=model, evaluator_client=surface_client(client_replies)
    )
    s1, _ = no_model.compute_rewards(surface_request)
    s2, _ = with_model.compute_rewards(surface_request)
    assert np.array_equal(s1.rewards, s2.rewards)


def test_blended_mode(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("b", shape="joint", n_edus=4)
    client = surface_client([EvaluatorScores(4, 4, 4).render()])
    engine = RewardEngine(
        motif_set=dset, model=model, evaluator_client=client, alpha=0.0, blend_weight=0.25
    )
    tensor, diag = engine.compute_rewards(
        RewardRequest(
            text=doc.source_text,
            desired_length=doc.token_count,
            mode=MODE_BLENDED,
            instruction="I",
            document=doc,
        )
    )
    expected = 0.25 * 4.0 + 0.75 * diag["p_human"]
    assert diag["raw_score"] == pytest.approx(expected, abs=1e-15)


def test_determinism_bit_identical(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("det", shape="joint", n_edus=5)
    engine = RewardEngine(motif_set=dset, model=model, alpha=0.3)
    request = RewardRequest(
        text=doc.source_text, desired_length=doc.token_count + 10, mode=MODE_GRAPH, document=doc
    )
    t1, d1 = engine.compute_rewards(request)
    t2, d2 = engine.compute_rewards(request)
    assert np.array_equal(t1.rewards, t2.rewards)
    assert d1 == d2


def test_per_motif_denominator_variant(corpus_bundle):
    _h, _m, dset, _hc, _mc, model = corpus_bundle
    doc = make_document("v", shape="joint", n_edus=4)
    engine = RewardEngine(
        motif_set=dset, model=model, alpha=0.0, dense_denominator=DENSE_DENOM_MOTIF
    )
    tensor, diag = engine.compute_rewards(
        RewardRequest(text=doc.source_text, desired_length=doc.token_count, mode=MODE_GRAPH, document=doc)
    )
    assert diag["dense_count"] > 0
    # values are 1/(2 * covering motif token count), not 1/(2n)
    for _i, value in tensor.dense:
        assert value > 1.0 / (2 * doc.token_count)
