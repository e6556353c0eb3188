import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_states
from oracles import kron_loops, partial_trace_loops
from qcoherence.errors import ArgumentError, SizeLimitError, StateFormatError, ValidationError
from qcoherence.qmatrix import (
    PureState,
    QubitState,
    from_pure,
    kron,
    load_state,
    parse_state,
    partial_trace,
    save_state,
    validate,
)
from qcoherence.sampling import ginibre_mixed, haar_pure, worked_example

TOL = 1e-9


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_projectors(self):
        assert np.array_equal(kron(np.diag([1, 0]), np.diag([0, 1])), np.diag([0, 1, 0, 0]))

    def test_matches_loop_expansion(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            np.testing.assert_allclose(kron(a, b), kron_loops(a, b), rtol=0, atol=1e-14)

    def test_associative(self):
        rng = np.random.default_rng(4)
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        np.testing.assert_allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-14)

    def test_size_limit(self, monkeypatch):
        monkeypatch.setenv("COHERENCE_MAX_QUBITS", "3")
        kron(np.eye(4), np.eye(2))
        with pytest.raises(SizeLimitError):
            kron(np.eye(4), np.eye(4))

    def test_default_limit_is_14_qubits(self, monkeypatch):
        monkeypatch.delenv("COHERENCE_MAX_QUBITS", raising=False)
        with pytest.raises(SizeLimitError):
            PureState(np.eye(1, 2**15, dtype=complex)[0])


class TestFromPure:
    def test_basis(self):
        rho = from_pure(PureState(np.array([1, 0])))
        assert np.array_equal(rho.matrix, np.diag([1, 0]))

    def test_plus(self):
        rho = from_pure(PureState(np.array([1, 1]) / np.sqrt(2)))
        np.testing.assert_allclose(rho.matrix, np.full((2, 2), 0.5), atol=1e-15)

    def test_example_rank_one(self):
        rho = from_pure(worked_example())
        assert rho.dim == 8
        assert abs(np.trace(rho.matrix) - 1) < 1e-15
        evals = np.linalg.eigvalsh(rho.matrix)
        np.testing.assert_allclose(evals, [0] * 7 + [1], atol=TOL)
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-12) == 1

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            PureState(np.array([1, 1]))

    def test_haar_outputs_are_rank_one(self):
        for i in range(20):
            evals = np.linalg.eigvalsh(from_pure(haar_pure(3, 1, i)).matrix)
            np.testing.assert_allclose(evals, [0] * 7 + [1], atol=TOL)


class TestPartialTrace:
    def test_product_keeps_factor(self):
        rho = ginibre_mixed(2, 4, 1).matrix
        sigma = ginibre_mixed(1, 2, 2).matrix
        out = partial_trace(QubitState(kron(rho, sigma)), [0, 1])
        np.testing.assert_allclose(out.matrix, rho, atol=1e-14)
        out = partial_trace(QubitState(kron(rho, sigma)), [2])
        np.testing.assert_allclose(out.matrix, sigma, atol=1e-14)

    def test_bell_marginal(self, bell):
        np.testing.assert_allclose(partial_trace(bell, [0]).matrix, np.eye(2) / 2, atol=1e-15)
        np.testing.assert_allclose(partial_trace(bell, [1]).matrix, np.eye(2) / 2, atol=1e-15)

    @pytest.mark.parametrize("keep", [[0], [1], [2], [0, 1], [0, 2], [1, 2], [0, 1, 2]])
    def test_matches_index_sum(self, keep):
        for rho in random_states(6, 3, seed=keep[0] + 10 * len(keep)):
            got = partial_trace(rho, keep).matrix
            np.testing.assert_allclose(got, partial_trace_loops(rho.matrix, keep, 3), atol=1e-12)

    def test_labels_follow_kept_qubits(self):
        rho = from_pure(haar_pure(3, 0))
        assert partial_trace(rho, [0, 2]).labels == ("A1", "A3")

    @pytest.mark.parametrize("keep", [[], [3], [-1], [1, 0], [0, 0]])
    def test_bad_keep(self, keep):
        with pytest.raises(ArgumentError):
            partial_trace(from_pure(haar_pure(3, 0)), keep)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32), n=st.integers(2, 4), data=st.data())
    def test_trace_and_physicality_preserved(self, seed, n, data):
        rho = ginibre_mixed(n, data.draw(st.integers(1, 2**n)), seed)
        keep = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
        red = partial_trace(rho, keep)
        assert abs(np.trace(red.matrix) - np.trace(rho.matrix)) < TOL
        assert validate(red).passed

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32), data=st.data())
    def test_composition(self, seed, data):
        n = 4
        rho = ginibre_mixed(n, 16, seed)
        keep1 = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=2)))
        # positions inside keep1 to keep in the second pass
        inner = sorted(data.draw(st.sets(st.integers(0, len(keep1) - 1), min_size=1)))
        twice = partial_trace(partial_trace(rho, keep1), inner)
        once = partial_trace(rho, [keep1[i] for i in inner])
        np.testing.assert_allclose(twice.matrix, once.matrix, atol=TOL)

    def test_product_of_several_factors(self):
        factors = [ginibre_mixed(1, 2, s).matrix for s in range(4)]
        full = factors[0]
        for f in factors[1:]:
            full = kron(full, f)
        rho = QubitState(full)
        for q in range(4):
            np.testing.assert_allclose(partial_trace(rho, [q]).matrix, factors[q], atol=1e-14)
        np.testing.assert_allclose(partial_trace(rho, [1, 3]).matrix, kron(factors[1], factors[3]), atol=1e-14)


class TestValidate:
    def test_maximally_mixed_passes(self):
        assert validate(QubitState(np.diag([0.5, 0.5]))).passed

    def test_trace_two_fails(self):
        report = validate(QubitState(np.diag([1.0, 1.0])))
        assert not report.passed
        assert report.trace_defect == pytest.approx(1.0)

    def test_non_hermitian_fails(self):
        report = validate(QubitState(np.array([[0.5, 0.3], [0.1, 0.5]])))
        assert not report.passed
        assert report.hermiticity_defect == pytest.approx(0.2)

    def test_negative_eigenvalue_fails(self):
        report = validate(QubitState(np.array([[0.5, 0.9], [0.9, 0.5]])))
        assert not report.passed
        assert report.min_eigenvalue == pytest.approx(-0.4)

    def test_require_valid_raises(self):
        with pytest.raises(ValidationError, match="trace"):
            QubitState(np.diag([1.0, 1.0])).require_valid()

    def test_structural_errors(self):
        with pytest.raises(ArgumentError):
            QubitState(np.eye(3) / 3)
        with pytest.raises(ArgumentError):
            QubitState(np.array([[np.nan, 0], [0, 1]]))

    def test_matrix_is_read_only(self):
        rho = QubitState(np.diag([0.5, 0.5]))
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1


class TestStateFiles:
    def test_pure_round_trip_is_bit_exact(self, tmp_path):
        psi = haar_pure(3, 5)
        path = tmp_path / "s.json"
        save_state(psi, path)
        rho = load_state(path)
        assert np.array_equal(rho.matrix, from_pure(psi).matrix)

    def test_mixed_round_trip_is_bit_exact(self, tmp_path):
        rho = ginibre_mixed(2, 3, 9)
        path = tmp_path / "s.json"
        save_state(rho, path)
        assert np.array_equal(load_state(path).matrix, rho.matrix)

    def test_documented_layout(self):
        doc = {"n": 1, "kind": "pure", "amplitudes": [[0.6, 0.0], [0.0, 0.8]]}
        psi = parse_state(doc)
        assert isinstance(psi, PureState)
        np.testing.assert_array_equal(psi.amplitudes, [0.6, 0.8j])
        doc = {"matrix": [[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]}
        rho = parse_state(doc)
        np.testing.assert_array_equal(rho.matrix, [[0.5, -0.5j], [0.5j, 0.5]])

    @pytest.mark.parametrize(
        "doc",
        [
            [],
            {"n": 1},
            {"amplitudes": [[1, 0], [0, 0]], "matrix": [[[1, 0]]]},
            {"kind": "mixed", "amplitudes": [[1, 0], [0, 0]]},
            {"n": 2, "amplitudes": [[1, 0], [0, 0]]},
            {"amplitudes": [[1, 0, 0], [0, 0]]},
            {"amplitudes": [["a", 0], [0, 0]]},
            {"amplitudes": [[1, 0], [0, 0], [0, 0]]},
            {"matrix": [[[1, 0], [0, 0]], [[0, 0]]]},
            {"amplitudes": [[1, 0], [0, 0]], "extra": 1},
        ],
    )
    def test_malformed(self, doc):
        with pytest.raises(StateFormatError):
            parse_state(doc)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(StateFormatError):
            load_state(path)

    def test_file_is_plain_json(self, tmp_path):
        path = tmp_path / "s.json"
        save_state(worked_example(), path)
        doc = json.loads(path.read_text())
        assert doc["n"] == 3 and doc["kind"] == "pure" and len(doc["amplitudes"]) == 8
