import itertools
import math

import numpy as np
import pytest

from tspbn.dataset import DiscreteTable
from tspbn.inference import (CptSet, ZeroEvidenceError, evaluate_accuracy, evaluate_mse, evaluate_task,
                             fit_cpts, forward_sample, log_likelihood, query_posterior)
from tspbn.structure import Dag
from tspbn.synthetic import copy_chain, random_network_table

from .oracles import brute_joint


def single(counts, alpha):
    data = np.repeat(np.arange(len(counts)), counts).reshape(-1, 1)
    return fit_cpts(DiscreteTable(data, (len(counts),)), Dag.empty(1), alpha).tables[0][0]


def test_fit_smoothing():
    assert single([2, 2], 1.0).tolist() == [0.5, 0.5]
    assert single([3, 1], 1.0) == pytest.approx([4 / 6, 2 / 6], abs=1e-12)
    assert single([0, 0], 0.0).tolist() == [0.5, 0.5]


def test_fit_unseen_config_uniform_without_smoothing():
    t = DiscreteTable(np.array([[0, 1], [0, 0]]), (2, 2))
    cpts = fit_cpts(t, Dag.from_edges(2, [(0, 1)]), 0.0)
    assert cpts.tables[1].tolist() == [[0.5, 0.5], [0.5, 0.5]]


def test_cpt_rows_normalized(rng):
    t = random_network_table(rng, 5, 100)
    dag = Dag.from_edges(5, [(0, 2), (1, 2), (2, 3)])
    for alpha in (0.0, 0.5, 1.0):
        for tab in fit_cpts(t, dag, alpha).tables:
            assert np.allclose(tab.sum(axis=1), 1.0, atol=1e-9) and np.all(tab >= 0)
            if alpha > 0:
                assert np.all(tab > 0)


def test_query_single_node():
    cpts = CptSet(Dag.empty(1), (2,), (np.array([[0.3, 0.7]]),))
    assert query_posterior(cpts, 0).tolist() == pytest.approx([0.3, 0.7])


def test_query_deterministic_copy():
    cpts = CptSet(Dag.from_edges(2, [(0, 1)]), (2, 2), (np.array([[0.5, 0.5]]), np.eye(2)))
    assert query_posterior(cpts, 1, {0: 1})[1] == 1.0


def v_structure():
    dag = Dag.from_edges(3, [(0, 2), (1, 2)])
    tables = (np.array([[0.2, 0.8]]), np.array([[0.6, 0.4]]),
              np.array([[0.9, 0.1], [0.3, 0.7], [0.4, 0.6], [0.05, 0.95]]))
    return CptSet(dag, (2, 2, 2), tables)


@pytest.mark.parametrize("target, evidence", [(0, {2: 1}), (0, {2: 0}), (1, {2: 1, 0: 0}), (2, {}), (0, {1: 1})])
def test_query_matches_joint_table(target, evidence):
    cpts = v_structure()
    joint = brute_joint(cpts)
    index = tuple(evidence.get(v, slice(None)) for v in range(3))
    sliced = joint[index]
    keep = [v for v in range(3) if v not in evidence]
    expected = sliced.sum(axis=tuple(i for i, v in enumerate(keep) if v != target))
    assert query_posterior(cpts, target, evidence) == pytest.approx(expected / expected.sum(), abs=1e-12)


def test_query_random_networks_against_joint(rng):
    for _ in range(10):
        t = random_network_table(rng, 5, 300)
        dag = Dag.from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)])
        cpts = fit_cpts(t, dag, 1.0)
        joint = brute_joint(cpts)
        target = int(rng.integers(5))
        ev_vars = [v for v in range(5) if v != target and rng.random() < 0.5]
        evidence = {v: int(rng.integers(cpts.cardinalities[v])) for v in ev_vars}
        post = query_posterior(cpts, target, evidence)
        mask = np.ones(joint.shape, dtype=bool)
        for v, s in evidence.items():
            idx = [slice(None)] * 5
            idx[v] = np.arange(joint.shape[v]) != s
            mask[tuple(idx)] = False
        marg = np.array([np.where(mask, joint, 0).take(k, axis=target).sum() for k in range(joint.shape[target])])
        assert post == pytest.approx(marg / marg.sum(), abs=1e-12)
        assert post.sum() == pytest.approx(1.0, abs=1e-9)


def test_query_reduces_to_cpt_row(rng):
    t = random_network_table(rng, 4, 200)
    dag = Dag.from_edges(4, [(0, 2), (1, 2), (2, 3)])
    cpts = fit_cpts(t, dag, 1.0)
    for a, b in itertools.product(range(t.cardinalities[0]), range(t.cardinalities[1])):
        j = a * t.cardinalities[1] + b
        assert query_posterior(cpts, 2, {0: a, 1: b}) == pytest.approx(cpts.tables[2][j], abs=1e-12)


def test_zero_evidence_raises():
    cpts = CptSet(Dag.from_edges(2, [(0, 1)]), (2, 2), (np.array([[1.0, 0.0]]), np.eye(2)))
    with pytest.raises(ZeroEvidenceError):
        query_posterior(cpts, 0, {1: 1})


def test_query_argument_checks():
    cpts = v_structure()
    with pytest.raises(ValueError):
        query_posterior(cpts, 0, {0: 1})
    with pytest.raises(ValueError):
        query_posterior(cpts, 0, {1: 5})


def test_mse_and_accuracy_perfect_predictor():
    t = copy_chain(200, 2)
    cpts = CptSet(Dag.from_edges(2, [(0, 1)]), (2, 2), (np.array([[0.5, 0.5]]), np.eye(2)))
    assert evaluate_mse(cpts, t, 1, [0]) == 0.0
    assert evaluate_accuracy(cpts, t, 1, [0]) == 1.0


def test_mse_constant_half(rng):
    t = DiscreteTable(rng.integers(0, 2, size=(50, 2)), (2, 2))
    cpts = CptSet(Dag.empty(2), (2, 2), (np.array([[0.5, 0.5]]),) * 2)
    assert evaluate_mse(cpts, t, 1, [0]) == pytest.approx(0.25, abs=1e-15)
    report = evaluate_task(cpts, t, 1, [0])
    c = report["confusion"]
    assert c["tp"] + c["fp"] == 0  # 0.5 is not above the threshold
    assert report["accuracy"] == pytest.approx(np.mean(t.data[:, 1] == 0))


def test_evaluation_ranges(rng):
    t = random_network_table(rng, 4, 300, max_card=2)
    cpts = fit_cpts(t, Dag.from_edges(4, [(0, 1), (1, 2)]), 1.0)
    assert 0 <= evaluate_mse(cpts, t, 2, [0]) <= 1
    assert 0 <= evaluate_accuracy(cpts, t, 2, [0, 3]) <= 1


def test_log_likelihood_values():
    t = DiscreteTable(np.array([[0], [1], [0], [1]]), (2,))
    cpts = CptSet(Dag.empty(1), (2,), (np.array([[0.5, 0.5]]),))
    assert log_likelihood(cpts, t) == pytest.approx(4 * math.log(0.5))
    assert log_likelihood(cpts, t.take(slice(0, 0))) == 0.0


def test_true_structure_beats_empty_on_chain():
    t = copy_chain(1000, 3)
    chain = fit_cpts(t, Dag.from_edges(3, [(0, 1), (1, 2)]), 1.0)
    empty = fit_cpts(t, Dag.empty(3), 1.0)
    assert log_likelihood(chain, t) > log_likelihood(empty, t)


def test_fitted_cpts_beat_label_shuffled_cpts(rng):
    t = random_network_table(rng, 4, 500)
    dag = Dag.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    cpts = fit_cpts(t, dag, 1.0)
    for _ in range(5):
        corrupted = CptSet(dag, cpts.cardinalities,
                           tuple(tab[:, rng.permutation(tab.shape[1])] for tab in cpts.tables), 1.0)
        assert log_likelihood(cpts, t) >= log_likelihood(corrupted, t)


def test_forward_sample_matches_cpts(rng):
    cpts = v_structure()
    data = forward_sample(cpts, 50_000, rng)
    assert data[:, 0].mean() == pytest.approx(0.8, abs=0.01)
    both = (data[:, 0] == 1) & (data[:, 1] == 1)
    assert data[both, 2].mean() == pytest.approx(0.95, abs=0.01)
