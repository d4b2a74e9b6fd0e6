"""Tests for loss streams, the comparator, rate fits, records and config-driven experiments."""

import math
from dataclasses import replace

import numpy as np
import pytest

from app.domains import BallDomain, membership
from app.errors import ConfigError, DegenerateRate, DimensionMismatch, InfeasibleFamily
from app.experts import ExpertKind
from app.harness import (
    CHECKPOINT_HORIZONS,
    REGRET_NOISE_FLOOR,
    SUMMARY_HEADER,
    TRACE_HEADER,
    FamilyKind,
    LossStream,
    ProblemFamily,
    StreamCertificates,
    check_certificates,
    comparator_loss,
    fit_rate,
    generate_stream,
    pooled_rate_fit,
    read_trace_csv,
    sample_feasible,
    summary_path_for,
)
from app.harness.experiment import (
    RunConfig,
    load_run_configs,
    run_batch,
    run_experiment,
    run_rate_study,
    trace_growth_exponent,
)
from app.harness.registry import AlgorithmContext, AlgorithmRegistry, available_algorithms, build_algorithm
from app.settings import UocoSettings

ALL_FAMILIES = [
    (FamilyKind.LINEAR_ADVERSARIAL, None),
    (FamilyKind.STRONGLY_CONVEX_QUADRATIC, 0.5),
    (FamilyKind.EXP_CONCAVE_SQUARED, None),
    (FamilyKind.SMOOTH_REALIZABLE, None),
    (FamilyKind.SMOOTH_REALIZABLE, 0.25),
]


def _family(kind, d=3, T=64, seed=0, **kwargs):
    return ProblemFamily(kind=kind, dimension=d, horizon=T, seed=seed, **kwargs)


def _ball(d):
    return BallDomain(dimension=d, radius=1.0)


def _run_config(tmp_path, **overrides):
    data = {
        "algo": "universal",
        "T": 64,
        "d": 3,
        "seed": 0,
        "family": {"kind": "sc-quadratic", "modulus": 0.5},
        "domain": {"kind": "ball", "radius": 1.0},
        "record_timing": False,
        "certificate_samples": 100,
        "out": str(tmp_path / "trace.csv"),
    }
    data.update(overrides)
    return RunConfig.model_validate(data)


class TestProblemFamilies:
    @pytest.mark.parametrize("kind,modulus", ALL_FAMILIES)
    def test_certificates_hold(self, rng, standard_domains, kind, modulus):
        for domain in standard_domains:
            stream = generate_stream(_family(kind, modulus=modulus), domain)
            check_certificates(stream, domain, rng, samples=200)

    def test_forged_gradient_bound_detected(self, rng, unit_ball):
        stream = generate_stream(_family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, d=2, modulus=1.0), unit_ball)
        forged = replace(stream, certificates=replace(stream.certificates, G=1e-6))
        with pytest.raises(InfeasibleFamily):
            check_certificates(forged, unit_ball, rng, samples=200)

    def test_forged_modulus_detected(self, rng, unit_ball):
        stream = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=2), unit_ball)
        forged = replace(stream, certificates=replace(stream.certificates, lam=1.0))
        with pytest.raises(InfeasibleFamily):
            check_certificates(forged, unit_ball, rng, samples=200)

    def test_linear_gradients_are_unit(self, unit_ball):
        stream = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=2, T=32), unit_ball)
        for t in range(1, 33):
            assert np.linalg.norm(stream.gradient(t, np.zeros(2))) == pytest.approx(1.0)
        assert stream.certificates.G == 1.0

    @pytest.mark.parametrize("d", [2, 8])
    def test_linear_running_sum_grows_as_square_root(self, d):
        stream = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=d, T=4096, seed=3), _ball(d))
        prefix = np.cumsum(stream.linear, axis=0)
        t = np.arange(1, 4097)
        assert np.linalg.norm(prefix, axis=1) == pytest.approx(np.sqrt(t), rel=1e-9)
        for i in range(1, 4096):
            assert abs(float(stream.linear[i] @ prefix[i - 1])) <= 1e-9 * math.sqrt(i)

    def test_linear_comparator_gains_square_root(self):
        for T in (64, 256, 1024):
            stream = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=2, T=T), _ball(2))
            assert comparator_loss(stream, _ball(2)).value == pytest.approx(-math.sqrt(T), rel=1e-6)

    def test_linear_stream_is_a_prefix_across_horizons(self):
        short = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=4, T=128, seed=2), _ball(4))
        long = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=4, T=512, seed=2), _ball(4))
        assert np.array_equal(short.linear, long.linear[:128])

    def test_quadratic_certificates(self, unit_ball):
        target = np.array([0.3, 0.4])
        stream = generate_stream(
            _family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, d=2, modulus=0.5, target=target), unit_ball
        )
        cert = stream.certificates
        assert cert.lam == 0.5
        assert cert.G == pytest.approx(0.5 * 1.5)
        assert cert.alpha == pytest.approx(0.5 / cert.G**2)
        assert stream.loss(1, target) == pytest.approx(0.0)
        assert stream.loss(1, np.zeros(2)) == pytest.approx(0.25 * 0.25)

    def test_realizable_target_has_zero_loss(self, unit_ball):
        target = np.array([0.1, -0.2])
        stream = generate_stream(_family(FamilyKind.SMOOTH_REALIZABLE, d=2, target=target), unit_ball)
        assert stream.total_loss(target) == pytest.approx(0.0, abs=1e-12)
        assert stream.total_gradient(target) == pytest.approx(np.zeros(2), abs=1e-12)

    def test_drifting_centers_stay_feasible(self, standard_domains):
        for domain in standard_domains:
            stream = generate_stream(
                _family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, modulus=0.5, drift=True), domain
            )
            assert all(membership(c, domain, tol=1e-9) for c in stream.centers)

    def test_deterministic_in_seed(self, unit_ball):
        a = generate_stream(_family(FamilyKind.EXP_CONCAVE_SQUARED, d=2, seed=4), unit_ball)
        b = generate_stream(_family(FamilyKind.EXP_CONCAVE_SQUARED, d=2, seed=4), unit_ball)
        c = generate_stream(_family(FamilyKind.EXP_CONCAVE_SQUARED, d=2, seed=5), unit_ball)
        assert np.array_equal(a.directions, b.directions)
        assert np.array_equal(a.offsets, b.offsets)
        assert not np.array_equal(a.directions, c.directions)

    def test_infeasible_parameters(self, unit_ball):
        with pytest.raises(InfeasibleFamily):
            generate_stream(_family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, d=2), unit_ball)
        with pytest.raises(InfeasibleFamily):
            generate_stream(_family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, d=2, modulus=-1.0), unit_ball)
        with pytest.raises(InfeasibleFamily):
            generate_stream(_family(FamilyKind.SMOOTH_REALIZABLE, d=2, drift=True), unit_ball)
        with pytest.raises(InfeasibleFamily):
            generate_stream(
                _family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, d=2, modulus=0.5, target=[2.0, 2.0]), unit_ball
            )

    def test_dimension_mismatch(self, unit_ball):
        with pytest.raises(DimensionMismatch):
            generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=3), unit_ball)

    def test_family_validation(self):
        with pytest.raises(ConfigError):
            _family(FamilyKind.LINEAR_ADVERSARIAL, d=0)
        with pytest.raises(ConfigError):
            _family(FamilyKind.LINEAR_ADVERSARIAL, noise=-1.0)
        assert _family("sc-quadratic", modulus=0.5).name == "sc-quadratic(0.5)"

    def test_sample_feasible(self, rng, standard_domains):
        for domain in standard_domains:
            points = sample_feasible(domain, rng, 200)
            assert points.shape == (200, 3)
            assert all(membership(p, domain, tol=1e-9) for p in points)


class TestComparator:
    def test_cancelling_linear_losses(self, unit_ball):
        g = np.array([0.6, 0.8])
        stream = LossStream(
            family=_family(FamilyKind.LINEAR_ADVERSARIAL, d=2, T=2),
            certificates=StreamCertificates(G=1.0),
            weights=np.zeros(2),
            centers=np.zeros((2, 2)),
            directions=np.zeros((2, 2)),
            offsets=np.zeros(2),
            linear=np.stack([g, -g]),
        )
        for x in (np.zeros(2), np.array([0.5, -0.5])):
            assert stream.total_loss(x) == pytest.approx(0.0)
        assert comparator_loss(stream, unit_ball).value == pytest.approx(0.0)

    def test_linear_sum_lands_on_boundary(self, unit_ball):
        stream = generate_stream(_family(FamilyKind.LINEAR_ADVERSARIAL, d=2, T=33), unit_ball)
        total = np.sum(stream.linear, axis=0)
        result = comparator_loss(stream, unit_ball)
        assert result.converged
        assert result.x == pytest.approx(-total / np.linalg.norm(total), abs=1e-6)
        assert result.value == pytest.approx(-np.linalg.norm(total), abs=1e-6)

    def test_quadratic_matches_closed_form(self, standard_domains):
        for domain in standard_domains:
            stream = generate_stream(_family(FamilyKind.STRONGLY_CONVEX_QUADRATIC, modulus=0.5, drift=True), domain)
            result = comparator_loss(stream, domain)
            closed = stream.closed_form_minimizer(domain)
            assert stream.total_loss(closed) == pytest.approx(result.value, rel=1e-6, abs=1e-8)

    def test_realizable_value_is_zero(self, standard_domains):
        for domain in standard_domains:
            stream = generate_stream(_family(FamilyKind.SMOOTH_REALIZABLE), domain)
            assert comparator_loss(stream, domain).value == pytest.approx(0.0, abs=1e-6)

    def test_prefix_and_empty(self, unit_ball):
        stream = generate_stream(_family(FamilyKind.EXP_CONCAVE_SQUARED, d=2), unit_ball)
        assert comparator_loss(stream, unit_ball, rounds=0).method == "empty"
        prefix = comparator_loss(stream, unit_ball, rounds=16)
        assert prefix.value <= stream.total_loss(np.zeros(2), 16) + 1e-9
        with pytest.raises(ConfigError):
            stream.total_loss(np.zeros(2), 65)


class TestFitRate:
    def test_square_root_growth(self):
        horizons = [2**k for k in range(10, 15)]
        fit = fit_rate(horizons, [3.0 * math.sqrt(T) for T in horizons])
        assert fit.exponent == pytest.approx(0.5)
        assert not fit.bounded
        assert fit.n_checkpoints == 5

    def test_logarithmic_growth(self):
        horizons = [2**k for k in range(10, 15)]
        fit = fit_rate(horizons, [2.0 * math.log(T) for T in horizons])
        assert fit.exponent <= 0.15
        assert fit.log_slope == pytest.approx(2.0)

    def test_nonpositive_regret_is_bounded(self):
        fit = fit_rate([1024, 2048, 4096, 8192], [0.0, 0.0, 0.0, 0.0])
        assert fit.bounded
        assert fit.exponent is None
        assert fit.describe() == "bounded"

    def test_regret_below_noise_floor_is_bounded(self):
        horizons = [2**k for k in range(10, 15)]
        fit = fit_rate(horizons, [1e-9, 2e-9, 1e-8, 3e-8, 0.002])
        assert fit.bounded
        assert fit.exponent is None

    def test_noise_floor_scales_with_horizon(self):
        horizons = [2**k for k in range(10, 15)]
        just_above = [2 * REGRET_NOISE_FLOOR * T for T in horizons]
        fit = fit_rate(horizons, just_above)
        assert not fit.bounded
        assert fit.exponent == pytest.approx(1.0)

    def test_pooled_fit_averages_seeds(self):
        horizons = [2**k for k in range(10, 15)]
        low = [1.0 * math.sqrt(T) for T in horizons]
        high = [3.0 * math.sqrt(T) for T in horizons]
        fit = pooled_rate_fit(horizons, [low, high])
        assert fit.exponent == pytest.approx(0.5)
        assert fit.log_slope == pytest.approx(fit_rate(horizons, [2.0 * math.sqrt(T) for T in horizons]).log_slope)

    def test_pooled_fit_needs_rows(self):
        with pytest.raises(DegenerateRate):
            pooled_rate_fit([1024, 2048, 4096, 8192], [])
        with pytest.raises(DegenerateRate):
            pooled_rate_fit([1024, 2048, 4096, 8192], [[1.0, 2.0, 3.0, 4.0], [1.0, 2.0]])

    def test_too_few_checkpoints(self):
        with pytest.raises(DegenerateRate):
            fit_rate([1024, 2048, 4096], [1.0, 2.0, 3.0])

    def test_mismatched_inputs(self):
        with pytest.raises(DegenerateRate):
            fit_rate([1024, 2048, 4096, 8192], [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateRate):
            fit_rate([1024, 1024, 4096, 8192], [1.0, 2.0, 3.0, 4.0])


class TestAlgorithmRegistry:
    def test_names(self):
        assert AlgorithmRegistry().names == ["baseline", "ogd", "ons", "universal", "universal-smooth"]
        assert set(available_algorithms()) == set(AlgorithmRegistry().names)

    def test_unknown_algorithm(self, unit_ball):
        context = AlgorithmContext(horizon=16, domain=unit_ball, certificates=StreamCertificates(G=1.0))
        with pytest.raises(ConfigError):
            build_algorithm("adagrad", context)

    def test_single_expert_algorithms(self, unit_ball):
        context = AlgorithmContext(
            horizon=16, domain=unit_ball, certificates=StreamCertificates(G=1.0, alpha=1e-9)
        )
        ogd = build_algorithm("ogd", context)
        assert ogd.baseline
        assert [e.kind for e in ogd.experts] == [ExpertKind.CVX]
        ons = build_algorithm("ons", context)
        assert ons.experts[0].kind is ExpertKind.EXP
        assert ons.experts[0].modulus == pytest.approx(1 / 16)

    def test_universal_tracks_stream_modulus(self, unit_ball):
        context = AlgorithmContext(horizon=16, domain=unit_ball, certificates=StreamCertificates(G=1.0, lam=0.3))
        assert build_algorithm("universal", context).tracked_modulus == 0.3
        assert build_algorithm("universal-smooth", context).mode.value == "small-loss"


class TestRunConfigLoading:
    def test_single_run(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "algo: baseline\nT: 128\nd: 4\nfamily: {kind: exp-concave-squared}\ndomain: {kind: simplex}\n"
        )
        (config,) = load_run_configs(path)
        assert config.algo == "baseline"
        assert config.horizon == 128
        assert config.dimension == 4
        assert config.family.kind is FamilyKind.EXP_CONCAVE_SQUARED
        assert config.stem == "baseline_exp-concave-squared_simplex_T128_d4_s0"

    def test_runs_merge_over_defaults(self, tmp_path):
        path = tmp_path / "batch.yaml"
        path.write_text(
            "T: 64\nd: 2\nfamily: {kind: sc-quadratic, modulus: 0.5}\n"
            "runs:\n  - algo: universal\n  - algo: ogd\n    family: {modulus: 0.25}\n    seed: 3\n"
        )
        first, second = load_run_configs(path)
        assert first.family.modulus == 0.5
        assert second.algo == "ogd"
        assert second.family.kind is FamilyKind.STRONGLY_CONVEX_QUADRATIC
        assert second.family.modulus == 0.25
        assert second.seed == 3

    @pytest.mark.parametrize(
        "text",
        [
            "T: [unclosed\n",
            "- just\n- a list\n",
            "T: 64\nd: 2\nfamily: {kind: sc-quadratic}\ncolour: blue\n",
            "T: 1\nd: 2\nfamily: {kind: sc-quadratic}\n",
            "T: 64\nd: 2\nfamily: {kind: parabola}\n",
            "T: 64\nd: 2\nfamily: {kind: sc-quadratic}\nruns: []\n",
        ],
    )
    def test_invalid_files(self, tmp_path, text):
        path = tmp_path / "bad.yaml"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_run_configs(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_configs(tmp_path / "absent.yaml")

    def test_overrides(self, tmp_path):
        config = _run_config(tmp_path).with_overrides(T=128, d=None, family="linear-adversarial", domain="box")
        assert config.horizon == 128
        assert config.dimension == 3
        assert config.family.kind is FamilyKind.LINEAR_ADVERSARIAL
        assert config.domain.kind.value == "box"
        with pytest.raises(ConfigError):
            config.with_overrides(family="parabola")


class TestRunExperiment:
    def test_writes_trace_and_summary(self, tmp_path):
        result = run_experiment(_run_config(tmp_path), settings=UocoSettings(output_dir=str(tmp_path)))
        assert result.trace_path == tmp_path / "trace.csv"
        assert result.summary_path == summary_path_for(result.trace_path) == tmp_path / "trace.summary.csv"

        lines = result.trace_path.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_HEADER)
        assert len(lines) == 65
        rows = read_trace_csv(result.trace_path)
        assert float(rows[-1]["regret"]) == pytest.approx(result.trace.final_regret)
        assert int(rows[-1]["proj_count"]) == 64

        summary = result.summary_path.read_text().splitlines()
        assert summary[0] == ",".join(SUMMARY_HEADER)
        assert summary[0] == (
            "algo,family,domain,T,d,seed,final_regret,n_experts,total_projections,total_wall_ns,growth_exponent,partial"
        )
        assert summary[1].startswith("universal,sc-quadratic,ball,64,3,0,")
        assert summary[1].endswith(",false")

    def test_byte_identical_without_timing(self, tmp_path):
        settings = UocoSettings(output_dir=str(tmp_path))
        first = run_experiment(_run_config(tmp_path, out=str(tmp_path / "a.csv")), settings=settings)
        second = run_experiment(_run_config(tmp_path, out=str(tmp_path / "b.csv")), settings=settings)
        assert first.trace_path.read_bytes() == second.trace_path.read_bytes()
        assert first.summary_path.read_bytes() == second.summary_path.read_bytes()

    def test_default_output_location(self, tmp_path):
        config = _run_config(tmp_path, out=None)
        result = run_experiment(config, settings=UocoSettings(output_dir=str(tmp_path / "runs")))
        assert result.trace_path == tmp_path / "runs" / f"{config.stem}.csv"

    def test_without_writing(self, tmp_path):
        result = run_experiment(_run_config(tmp_path), settings=UocoSettings(output_dir=str(tmp_path)), write=False)
        assert result.trace_path is None
        assert not (tmp_path / "trace.csv").exists()

    def test_projection_counts_by_algorithm(self, tmp_path):
        settings = UocoSettings(output_dir=str(tmp_path))
        one = run_experiment(_run_config(tmp_path, domain={"kind": "simplex"}), settings=settings, write=False)
        many = run_experiment(
            _run_config(tmp_path, algo="baseline", domain={"kind": "simplex"}), settings=settings, write=False
        )
        assert one.summary.total_projections == 64
        assert many.summary.total_projections == 64 * many.summary.n_experts

    def test_growth_exponent_in_summary(self, tmp_path):
        result = run_experiment(
            _run_config(tmp_path, T=256, family={"kind": "linear-adversarial"}),
            settings=UocoSettings(output_dir=str(tmp_path)),
            write=False,
        )
        assert result.summary.growth_exponent == trace_growth_exponent(result.trace)

    def test_batch_reports_failures_per_entry(self, tmp_path):
        good = _run_config(tmp_path, out=str(tmp_path / "good.csv"))
        bad = _run_config(
            tmp_path,
            out=str(tmp_path / "bad.csv"),
            family={"kind": "sc-quadratic", "modulus": 0.5, "target": [5.0, 5.0, 5.0]},
        )
        results = run_batch([good, bad], workers=1)
        assert [r.index for r in results] == [0, 1]
        assert results[0].error_type is None
        assert results[0].summary is not None
        assert results[1].error_type == "InfeasibleFamily"
        assert results[1].summary is None

    def test_rate_study(self, tmp_path):
        config = _run_config(tmp_path, family={"kind": "linear-adversarial"})
        (result,) = run_rate_study(config, horizons=[32, 64, 128, 256], seeds=[0])
        assert result.horizons == (32, 64, 128, 256)
        assert len(result.regrets) == 4
        assert result.fit is not None


SQUARE = {
    "kind": "halfspaces",
    "normals": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    "offsets": [1.0, 1.0, 1.0, 1.0],
    "diameter": 3.0,
}


class TestExplicitHalfspaces:
    def _run(self, tmp_path, **domain):
        config = _run_config(tmp_path, d=2, domain={**SQUARE, **domain})
        return run_experiment(config, settings=UocoSettings(output_dir=str(tmp_path)), write=False)

    def test_declared_square_runs(self, tmp_path):
        result = self._run(tmp_path)
        assert not result.summary.partial
        assert result.summary.total_projections == 64

    def test_diameter_too_small(self, tmp_path):
        with pytest.raises(ConfigError, match="diameter"):
            self._run(tmp_path, diameter=1.0)

    def test_missing_diameter(self, tmp_path):
        with pytest.raises(ConfigError, match="normals, offsets and a diameter"):
            self._run(tmp_path, diameter=None)

    def test_missing_offsets(self, tmp_path):
        with pytest.raises(ConfigError):
            self._run(tmp_path, offsets=None)

    def test_origin_must_be_feasible(self, tmp_path):
        with pytest.raises(ConfigError, match="origin"):
            self._run(tmp_path, offsets=[1.0, -0.5, 1.0, 1.0])

    def test_ragged_normals(self, tmp_path):
        with pytest.raises(ConfigError):
            self._run(tmp_path, normals=[[1.0, 0.0], [-1.0]], offsets=[1.0, 1.0])


RATE_SEEDS = [0, 1, 2, 3, 4]


def _pooled_rate(tmp_path, d, family):
    config = _run_config(tmp_path, d=d, family=family)
    results = run_rate_study(config, horizons=CHECKPOINT_HORIZONS, seeds=RATE_SEEDS, workers=4)
    assert [r.horizons for r in results] == [tuple(CHECKPOINT_HORIZONS)] * len(RATE_SEEDS)
    return pooled_rate_fit(CHECKPOINT_HORIZONS, [r.regrets for r in results])


@pytest.mark.slow
class TestRates:
    @pytest.mark.parametrize("d", [2, 8])
    @pytest.mark.parametrize("modulus", [1.0, 1.0 / 32])
    def test_strongly_convex_growth_is_logarithmic(self, tmp_path, d, modulus):
        fit = _pooled_rate(tmp_path, d, {"kind": "sc-quadratic", "modulus": modulus})
        assert fit.bounded or fit.exponent <= 0.25

    @pytest.mark.parametrize("d", [2, 8])
    def test_exp_concave_growth_is_logarithmic(self, tmp_path, d):
        fit = _pooled_rate(tmp_path, d, {"kind": "exp-concave-squared"})
        assert fit.bounded or fit.exponent <= 0.30

    @pytest.mark.parametrize("d", [2, 8])
    def test_linear_growth_is_square_root(self, tmp_path, d):
        fit = _pooled_rate(tmp_path, d, {"kind": "linear-adversarial"})
        assert not fit.bounded
        assert 0.35 <= fit.exponent <= 0.65
