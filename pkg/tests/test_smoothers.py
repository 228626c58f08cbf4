"""Smoother families, grid construction, and the ordered-family check.

Weight formulas are checked against values small enough to evaluate by hand;
the ordered-family verifier is checked against hand-built witness tables and
against every generated family, which is ordered by construction.
"""

import numpy as np
import pytest

from specreg import (
    GridSpec,
    OrderViolation,
    SmootherFamily,
    SmootherGrid,
    build_grid,
    cutoff_weights,
    ellipsoid_profile,
    explicit_grid,
    landweber_weights,
    make_polynomial_spectrum,
    pinsker_weights,
    tikhonov_weights,
    validate,
    verify_ordered,
    weights_at,
)


class TestWeightFormulas:
    """Each family's weight function at hand-checkable points."""

    def test_cutoff(self):
        w = cutoff_weights([1.0, 0.5, 1.0 / 3.0], 0.4)
        np.testing.assert_array_equal(w, [1.0, 1.0, 0.0])

    def test_cutoff_boundary_is_inclusive(self):
        np.testing.assert_array_equal(cutoff_weights([0.4], 0.4), [1.0])

    def test_tikhonov(self):
        # lam = alpha = 1 gives exactly one half
        np.testing.assert_array_equal(tikhonov_weights([1.0], 1.0), [0.5])
        np.testing.assert_array_equal(tikhonov_weights([1.0], 1.0, order=2), [0.25])
        np.testing.assert_allclose(tikhonov_weights([3.0], 1.0), [0.75])

    def test_tikhonov_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError, match="alpha must be > 0"):
            tikhonov_weights([1.0], 0.0)

    def test_landweber(self):
        # one step of gradient descent: h = lam / step
        np.testing.assert_array_equal(landweber_weights([0.5, 1.0], 1.0, 0), [0.5, 1.0])
        # two steps at lam/step = 1/2: 1 - (1/2)^2
        np.testing.assert_array_equal(landweber_weights([0.5], 1.0, 1), [0.75])
        # the top eigenvalue at step == lam is recovered exactly
        np.testing.assert_array_equal(landweber_weights([1.0], 1.0, 7), [1.0])

    def test_landweber_rejects_small_step(self):
        with pytest.raises(ValueError, match="largest eigenvalue"):
            landweber_weights([2.0, 1.0], 1.5, 3)

    def test_landweber_rejects_bad_iterations(self):
        with pytest.raises(ValueError, match="iterations"):
            landweber_weights([1.0], 2.0, -1)
        with pytest.raises(ValueError, match="iterations"):
            landweber_weights([1.0], 2.0, 1.5)

    def test_pinsker(self):
        np.testing.assert_array_equal(pinsker_weights([2.0], 1.0), [0.5])
        np.testing.assert_array_equal(pinsker_weights([2.0], 1.0, nu=2.0), [0.75])

    def test_pinsker_hits_exact_zero(self):
        # clipped, not merely small: alpha / lam ** nu >= 1
        w = pinsker_weights([1.0, 0.5], 0.6)
        assert w[1] == 0.0
        np.testing.assert_allclose(w[0], 0.4)
        assert pinsker_weights([1.0], 1.0)[0] == 0.0

    def test_pinsker_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError, match="alpha must be > 0"):
            pinsker_weights([1.0], -0.1)

    def test_ellipsoid_profile(self):
        np.testing.assert_array_equal(ellipsoid_profile([1.0, 4.0, 9.0], 0.5), [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("kind", ["cutoff", "tikhonov", "landweber", "pinsker"])
    def test_weights_stay_in_unit_interval(self, kind):
        rng = np.random.default_rng(17)
        lam = np.sort(rng.uniform(0.01, 2.0, size=30))[::-1]
        spectrum = validate(lam)
        fam = SmootherFamily(kind=kind, order=2, nu=1.3)
        grid = build_grid(fam, spectrum, GridSpec(kind="natural", count=25))
        assert np.all(grid.weights >= 0.0)
        assert np.all(grid.weights <= 1.0)


class TestSmootherFamily:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown family kind"):
            SmootherFamily(kind="wavelet")

    def test_order_validation(self):
        with pytest.raises(ValueError, match="order"):
            SmootherFamily(kind="tikhonov", order=0)
        with pytest.raises(ValueError, match="order"):
            SmootherFamily(kind="tikhonov", order=1.5)
        assert SmootherFamily(kind="tikhonov", order=3.0).order == 3

    def test_step_validation(self):
        with pytest.raises(ValueError, match="step must be > 0"):
            SmootherFamily(kind="landweber", step=0.0)
        with pytest.raises(ValueError, match="step_factor"):
            SmootherFamily(kind="landweber", step_factor=1.0)

    def test_nu_validation(self):
        with pytest.raises(ValueError, match="nu must be > 0"):
            SmootherFamily(kind="pinsker", nu=0.0)

    def test_resolve_step_default(self):
        spectrum = validate([2.0, 1.0])
        fam = SmootherFamily(kind="landweber", step_factor=1.5)
        assert fam.resolve_step(spectrum) == 3.0

    def test_resolve_step_explicit_must_exceed_top(self):
        spectrum = validate([2.0, 1.0])
        fam = SmootherFamily(kind="landweber", step=2.0)
        with pytest.raises(ValueError, match="must exceed the largest eigenvalue"):
            fam.resolve_step(spectrum)
        assert SmootherFamily(kind="landweber", step=2.5).resolve_step(spectrum) == 2.5


class TestBuildGrid:
    def test_cutoff_natural_is_nested_projections(self):
        spectrum = make_polynomial_spectrum(4, 1.0)
        grid = build_grid(SmootherFamily(kind="cutoff"), spectrum)
        np.testing.assert_array_equal(grid.weights, np.tril(np.ones((4, 4))))
        np.testing.assert_array_equal(grid.alphas, spectrum.lam)
        assert grid.size == 4

    def test_cutoff_geometric_matches_weight_function(self):
        spectrum = make_polynomial_spectrum(6, 1.0)
        spec = GridSpec(kind="geometric", count=5, alpha_min=0.2, alpha_max=1.0)
        grid = build_grid(SmootherFamily(kind="cutoff"), spectrum, spec)
        for g, a in enumerate(grid.alphas):
            np.testing.assert_array_equal(grid.weights[g], cutoff_weights(spectrum.lam, a))

    def test_tikhonov_default_levels(self):
        spectrum = make_polynomial_spectrum(5, 1.0)
        grid = build_grid(SmootherFamily(kind="tikhonov"), spectrum, GridSpec(count=10))
        # row 0 smooths maximally at alpha = lam(1), so the leading weight is 1/2
        assert grid.alphas[0] == spectrum.lam[0]
        assert grid.weights[0, 0] == 0.5
        assert grid.alphas[-1] == pytest.approx(1e-3 * spectrum.lam[-1])
        # smoothing levels decrease, weights grow along rows
        assert np.all(np.diff(grid.alphas) < 0)
        assert np.all(np.diff(grid.weights, axis=0) >= 0)

    def test_landweber_natural(self):
        spectrum = validate([2.0, 1.0])
        fam = SmootherFamily(kind="landweber", step=4.0)
        grid = build_grid(fam, spectrum, GridSpec(kind="natural", count=5))
        np.testing.assert_allclose(grid.alphas, [1.0, 0.5, 1.0 / 3.0, 0.25, 0.2])
        for g, it in enumerate(range(1, 6)):
            np.testing.assert_array_equal(
                grid.weights[g], landweber_weights(spectrum.lam, 4.0, it)
            )

    def test_landweber_rejects_geometric(self):
        spectrum = validate([1.0])
        with pytest.raises(ValueError, match="iteration counts"):
            build_grid(
                SmootherFamily(kind="landweber"),
                spectrum,
                GridSpec(kind="geometric", count=3, alpha_min=0.1, alpha_max=1.0),
            )

    def test_landweber_explicit_iterations(self):
        spectrum = validate([2.0, 1.0])
        fam = SmootherFamily(kind="landweber", step=3.0)
        grid = build_grid(fam, spectrum, GridSpec(kind="explicit", values=(1, 3, 7)))
        np.testing.assert_allclose(grid.alphas, [1.0, 1.0 / 3.0, 1.0 / 7.0])
        assert grid.size == 3

    def test_landweber_explicit_rejects_bad_counts(self):
        spectrum = validate([1.0])
        fam = SmootherFamily(kind="landweber")
        with pytest.raises(ValueError, match="strictly increasing"):
            build_grid(fam, spectrum, GridSpec(kind="explicit", values=(2, 2)))
        with pytest.raises(ValueError, match="strictly increasing"):
            build_grid(fam, spectrum, GridSpec(kind="explicit", values=(3, 1)))
        with pytest.raises(ValueError, match="integers >= 1"):
            build_grid(fam, spectrum, GridSpec(kind="explicit", values=(1.5, 2.0)))
        with pytest.raises(ValueError, match="integers >= 1"):
            build_grid(fam, spectrum, GridSpec(kind="explicit", values=(0, 1)))
        with pytest.raises(ValueError, match="needs iteration counts"):
            build_grid(fam, spectrum, GridSpec(kind="explicit"))

    def test_pinsker_default_levels(self):
        spectrum = make_polynomial_spectrum(5, 2.0)
        fam = SmootherFamily(kind="pinsker", nu=1.5)
        grid = build_grid(fam, spectrum, GridSpec(count=8))
        # default top level keeps the leading weight at one half
        assert grid.weights[0, 0] == 0.5

    def test_explicit_levels_sorted_descending(self):
        spectrum = validate([2.0, 1.0])
        spec = GridSpec(kind="explicit", values=(0.1, 1.0, 0.5))
        grid = build_grid(SmootherFamily(kind="tikhonov"), spectrum, spec)
        np.testing.assert_array_equal(grid.alphas, [1.0, 0.5, 0.1])

    def test_explicit_levels_must_be_positive(self):
        spectrum = validate([1.0])
        spec = GridSpec(kind="explicit", values=(1.0, -0.5))
        with pytest.raises(ValueError, match="must be positive"):
            build_grid(SmootherFamily(kind="tikhonov"), spectrum, spec)

    def test_explicit_family_goes_through_explicit_grid(self):
        spectrum = validate([1.0])
        with pytest.raises(ValueError, match="explicit_grid"):
            build_grid(SmootherFamily(kind="explicit"), spectrum)

    def test_dense_storage_cap(self):
        spectrum = make_polynomial_spectrum(5000, 0.0)
        with pytest.raises(ValueError, match="dense-storage cap"):
            build_grid(SmootherFamily(kind="cutoff"), spectrum)


class TestSmootherGrid:
    def test_row_count_mismatch(self):
        spectrum = validate([1.0, 0.5])
        with pytest.raises(ValueError, match="smoothing levels but"):
            SmootherGrid(
                SmootherFamily(kind="explicit"),
                spectrum,
                np.array([1.0]),
                np.ones((2, 2)),
            )

    def test_row_length_mismatch(self):
        spectrum = validate([1.0, 0.5])
        with pytest.raises(ValueError, match="but the spectrum"):
            SmootherGrid(
                SmootherFamily(kind="explicit"),
                spectrum,
                np.array([1.0]),
                np.ones((1, 3)),
            )

    def test_out_of_range_weight_names_position(self):
        spectrum = validate([1.0, 0.5, 0.25])
        weights = np.array([[1.0, 0.5, 0.0], [1.0, 0.5, 1.2]])
        with pytest.raises(ValueError, match="row 2, index 3"):
            SmootherGrid(
                SmootherFamily(kind="explicit"), spectrum, np.array([2.0, 1.0]), weights
            )

    def test_non_finite_weights(self):
        spectrum = validate([1.0])
        with pytest.raises(ValueError, match="non-finite"):
            SmootherGrid(
                SmootherFamily(kind="explicit"),
                spectrum,
                np.array([1.0]),
                np.array([[np.nan]]),
            )

    def test_arrays_read_only(self):
        grid = build_grid(SmootherFamily(kind="cutoff"), validate([1.0, 0.5]))
        with pytest.raises(ValueError):
            grid.weights[0, 0] = 0.5
        with pytest.raises(ValueError):
            grid.alphas[0] = 9.0


class TestVerifyOrdered:
    def test_generated_families_are_ordered(self):
        rng = np.random.default_rng(23)
        for trial in range(10):
            lam = np.sort(rng.uniform(1e-3, 3.0, size=40))[::-1]
            spectrum = validate(lam)
            for kind in ("cutoff", "tikhonov", "landweber", "pinsker"):
                fam = SmootherFamily(kind=kind, order=1 + trial % 3, nu=0.5 + trial % 2)
                spec = GridSpec(kind="natural", count=20)
                ok, witness = verify_ordered(build_grid(fam, spectrum, spec))
                assert ok, f"{kind} trial {trial}: {witness}"

    def test_crossing_witness(self):
        spectrum = validate([1.0, 0.5])
        grid = explicit_grid(spectrum, [2.0, 1.0], [[0.9, 0.1], [0.5, 0.5]])
        ok, witness = verify_ordered(grid)
        assert not ok
        assert witness == OrderViolation(kind="crossing", g1=0, g2=1, k_prime=1, k=0)

    def test_row_monotonicity_witness(self):
        spectrum = validate([1.0, 0.5, 0.25])
        grid = explicit_grid(spectrum, [1.0], [[0.2, 0.8, 0.3]])
        ok, witness = verify_ordered(grid)
        assert not ok
        assert witness.kind == "row-monotonicity"
        assert (witness.g1, witness.g2) == (0, 0)
        # 1-based coordinate of the first rise and the first fall
        assert (witness.k_prime, witness.k) == (1, 2)

    def test_rows_may_increase_or_decrease(self):
        spectrum = validate([1.0, 0.5])
        grid = explicit_grid(spectrum, [2.0, 1.0], [[0.2, 0.4], [0.3, 0.6]])
        ok, witness = verify_ordered(grid)
        assert ok and witness is None

    def test_tolerance_absorbs_rounding(self):
        spectrum = validate([1.0, 0.5])
        table = [[0.5, 0.5 + 1e-13], [0.5, 0.5]]
        ok, _ = verify_ordered(explicit_grid(spectrum, [2.0, 1.0], table))
        assert ok

    def test_nested_projections_do_not_cross(self):
        grid = build_grid(SmootherFamily(kind="cutoff"), make_polynomial_spectrum(8, 1.0))
        ok, _ = verify_ordered(grid)
        assert ok


class TestWeightsAt:
    def test_returns_requested_row(self):
        grid = build_grid(SmootherFamily(kind="cutoff"), validate([1.0, 0.5, 0.25]))
        np.testing.assert_array_equal(weights_at(grid, 1), [1.0, 1.0, 0.0])

    def test_out_of_range(self):
        grid = build_grid(SmootherFamily(kind="cutoff"), validate([1.0, 0.5]))
        with pytest.raises(IndexError):
            weights_at(grid, 2)
        with pytest.raises(IndexError):
            weights_at(grid, -1)
