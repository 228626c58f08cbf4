"""Spectrum construction, matrix ingestion, and CSV interchange.

Ground truth used here:
- generator families against values computed by hand from the closed forms
- eigendecomposition of 3x3 Gram matrices against the trigonometric cubic
  formula, which is independent of any iterative eigensolver
- larger decompositions against the reconstruction identity V diag(lam) V.T
"""

import math
import warnings

import numpy as np
import pytest

from specreg import (
    DynamicRangeError,
    FileFormatError,
    MonotonicityError,
    PositivityError,
    Spectrum,
    decompose,
    make_exponential_spectrum,
    make_polynomial_spectrum,
    project_observation,
    read_matrix_csv,
    read_spectrum_csv,
    validate,
    write_spectrum_csv,
)


def sym3_eigvals(s):
    """Eigenvalues of a symmetric 3x3 via the trigonometric cubic formula."""
    p1 = s[0, 1] ** 2 + s[0, 2] ** 2 + s[1, 2] ** 2
    q = np.trace(s) / 3.0
    p2 = (s[0, 0] - q) ** 2 + (s[1, 1] - q) ** 2 + (s[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    if p == 0.0:
        return np.array([q, q, q])
    b = (s - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array(sorted([e1, e2, e3], reverse=True))


class TestGenerators:
    """Closed-form spectra against hand-computed values."""

    def test_polynomial_values(self):
        # k**-2 for k = 1..4
        spec = make_polynomial_spectrum(4, 2.0)
        expected = [1.0, 0.25, 0.1111111111111111, 0.0625]
        np.testing.assert_allclose(spec.lam, expected, rtol=0, atol=1e-16)

    def test_polynomial_beta_zero_is_identity(self):
        spec = make_polynomial_spectrum(6, 0.0)
        np.testing.assert_array_equal(spec.lam, np.ones(6))

    def test_exponential_values(self):
        # exp(-1e-4 * k) for k = 1, 2
        spec = make_exponential_spectrum(2, 1e-4)
        expected = [0.9999000049998333, 0.9998000199986667]
        np.testing.assert_allclose(spec.lam, expected, rtol=1e-15)

    def test_single_element(self):
        assert make_polynomial_spectrum(1, 3.0).lam.tolist() == [1.0]

    @pytest.mark.parametrize("bad_n", [0, -2])
    def test_rejects_nonpositive_n(self, bad_n):
        with pytest.raises(ValueError, match="n must be >= 1"):
            make_polynomial_spectrum(bad_n, 1.0)
        with pytest.raises(ValueError, match="n must be >= 1"):
            make_exponential_spectrum(bad_n, 1.0)

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError, match="beta must be >= 0"):
            make_polynomial_spectrum(5, -0.5)
        with pytest.raises(ValueError, match="beta must be >= 0"):
            make_exponential_spectrum(5, -0.5)

    def test_steep_exponential_overflows_guard(self):
        # exp(-499) / exp(-1) ~ 1e-217 sits far below the dynamic-range guard
        with pytest.raises(DynamicRangeError):
            make_exponential_spectrum(500, 1.0)


class TestValidate:
    def test_accepts_list_and_tuple(self):
        for raw in ([2.0, 1.0, 0.5], (2.0, 1.0, 0.5)):
            spec = validate(raw)
            assert isinstance(spec, Spectrum)
            assert spec.n == 3
            assert spec.cond == 4.0

    def test_positive_violation_reports_first_index(self):
        with pytest.raises(PositivityError, match="first violation at index 3"):
            validate([1.0, 0.5, 0.0, 0.25])
        with pytest.raises(PositivityError, match="first violation at index 1"):
            validate([-1.0, -2.0])

    def test_monotonicity_violation_reports_first_index(self):
        with pytest.raises(MonotonicityError, match="first violation at index 4"):
            validate([3.0, 2.0, 1.0, 1.5, 0.5])

    def test_ties_are_allowed(self):
        spec = validate([1.0, 1.0, 0.5])
        assert spec.n == 3

    def test_dynamic_range_guard(self):
        with pytest.raises(DynamicRangeError, match="dynamic range too wide"):
            validate([1.0, 1e-160])
        # Exactly at the guard ratio is still admissible
        assert validate([1.0, 1e-150]).cond == 1e150

    def test_lam_is_read_only(self):
        spec = validate([2.0, 1.0])
        with pytest.raises(ValueError):
            spec.lam[0] = 5.0

    def test_equality_and_hash(self):
        a = validate([2.0, 1.0])
        b = validate([2.0, 1.0])
        c = validate([2.0, 0.5])
        assert a == b
        assert hash(a) == hash(b)
        assert a != c
        assert a != [2.0, 1.0]

    def test_rejects_non_vector(self):
        with pytest.raises(ValueError):
            validate([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(ValueError):
            validate([1.0, float("nan")])


class TestDecompose:
    """Matrix ingestion against independent linear algebra."""

    def test_identity_design(self):
        spec, basis = decompose(np.eye(4))
        np.testing.assert_allclose(spec.lam, np.ones(4), atol=1e-12)
        np.testing.assert_allclose(basis @ basis.T, np.eye(4), atol=1e-12)

    def test_diagonal_design_sorted(self):
        # Gram matrix is diag(1, 16, 9); eigenvalues come back sorted
        a = np.diag([1.0, 4.0, 3.0])
        spec, basis = decompose(a)
        np.testing.assert_allclose(spec.lam, [16.0, 9.0, 1.0], atol=1e-12)
        # each basis column picks out the matching coordinate
        recon = (basis * spec.lam) @ basis.T
        np.testing.assert_allclose(recon, a.T @ a, atol=1e-10)

    def test_three_by_three_against_cubic_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.standard_normal((3, 3))
            gram = a.T @ a
            spec, _ = decompose(a)
            ref = sym3_eigvals(gram)
            scale = max(1.0, ref[0])
            np.testing.assert_allclose(spec.lam, ref, atol=1e-9 * scale)

    @pytest.mark.parametrize("n", [2, 3, 5, 8, 16, 32, 64])
    def test_reconstruction_and_trace(self, n):
        rng = np.random.default_rng(100 + n)
        a = rng.standard_normal((n + 3, n))
        gram = a.T @ a
        spec, basis = decompose(a)
        recon = (basis * spec.lam) @ basis.T
        scale = float(np.linalg.norm(gram))
        assert np.linalg.norm(recon - gram) <= 1e-10 * scale
        assert abs(math.fsum(spec.lam.tolist()) - np.trace(gram)) <= 1e-10 * scale
        np.testing.assert_allclose(basis.T @ basis, np.eye(n), atol=1e-10)

    def test_rectangular_design(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((12, 5))
        spec, basis = decompose(a)
        assert spec.n == 5
        assert basis.shape == (5, 5)
        assert np.all(np.diff(spec.lam) <= 0)

    def test_singular_design_rejected(self):
        a = np.array([[1.0, 1.0], [2.0, 2.0]])
        with pytest.raises(DynamicRangeError, match="full column rank"):
            decompose(a)

    def test_conditioning_warning(self):
        a = np.diag([1.0, 1e-8])
        with pytest.warns(RuntimeWarning, match="badly conditioned"):
            spec, _ = decompose(a)
        np.testing.assert_allclose(spec.lam, [1.0, 1e-16], rtol=1e-10)

    def test_dimension_cap(self):
        with pytest.raises(ValueError, match="capped at 512"):
            decompose(np.zeros((2, 513)))

    def test_rejects_non_finite(self):
        a = np.eye(3)
        a[1, 1] = np.inf
        with pytest.raises(ValueError):
            decompose(a)


class TestProjectObservation:
    def test_recovers_coefficients_in_eigenbasis(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((20, 6))
        theta = rng.standard_normal(6)
        spec, basis = decompose(a)
        y = a @ theta
        coords = project_observation(a, y, spec, basis)
        # noiseless observations project to the rotated coefficients
        np.testing.assert_allclose(coords, basis.T @ theta, atol=1e-9)

    def test_length_mismatch(self):
        a = np.eye(3)
        spec, basis = decompose(a)
        with pytest.raises(ValueError, match="rows but y has length"):
            project_observation(a, [1.0, 2.0], spec, basis)

    def test_spectrum_mismatch(self):
        a = np.eye(3)
        spec, basis = decompose(a)
        other = validate([1.0, 0.5])
        with pytest.raises(ValueError, match="columns but the spectrum"):
            project_observation(a, [1.0, 2.0, 3.0], other, basis)


class TestSpectrumCsv:
    def test_round_trip(self, tmp_path):
        spec = make_polynomial_spectrum(7, 1.5)
        path = tmp_path / "spec.csv"
        write_spectrum_csv(spec, path)
        back = read_spectrum_csv(path)
        np.testing.assert_array_equal(back.lam, spec.lam)

    def test_header_written(self, tmp_path):
        path = tmp_path / "spec.csv"
        write_spectrum_csv(validate([2.0, 1.0]), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "k,lambda"
        assert lines[1].startswith("1,")

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2.0\n2,1.0\n")
        with pytest.raises(FileFormatError, match="expected header"):
            read_spectrum_csv(path)

    def test_non_consecutive_k(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("k,lambda\n1,2.0\n3,1.0\n")
        with pytest.raises(FileFormatError, match=r"bad\.csv:3"):
            read_spectrum_csv(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("k,lambda\n1,two\n")
        with pytest.raises(FileFormatError, match=r"bad\.csv:2"):
            read_spectrum_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(FileFormatError):
            read_spectrum_csv(path)

    def test_values_survive_full_precision(self, tmp_path):
        # %.17g output must reproduce every bit of the double
        vals = [1.0, 1.0 / 3.0, 0.1234567890123456789e-5]
        path = tmp_path / "spec.csv"
        write_spectrum_csv(validate(vals), path)
        back = read_spectrum_csv(path)
        assert back.lam.tolist() == validate(vals).lam.tolist()


class TestMatrixCsv:
    def test_reads_headerless_matrix(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n5.0,6.0\n")
        mat = read_matrix_csv(path)
        np.testing.assert_array_equal(mat, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(FileFormatError, match="ragged rows"):
            read_matrix_csv(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1.0,x\n")
        with pytest.raises(FileFormatError, match=r"a\.csv:1"):
            read_matrix_csv(path)

    def test_empty(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("\n")
        with pytest.raises(FileFormatError, match="no data rows"):
            read_matrix_csv(path)
