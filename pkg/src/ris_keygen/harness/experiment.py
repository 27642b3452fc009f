"""Run one configured experiment and judge it against the analytic model."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..analytic import (
    AnalyticPrediction,
    gaussian_mi_bits,
    noise_var_from_snr_db,
    predict_distribution,
    reference_cdfs,
    quadrature_cdfs,
    skr_closed_form,
    skr_per_quadrature,
)
from ..channel import ChannelModel, SampleBatch, sample_batch, write_observations_csv, write_samples_csv
from ..errors import NoClosedForm
from ..geometry import RisGeometry
from ..stats import empirical_summary, ks_test, mi_knn
from ..weights import PhaseScheme, wrap_phase
from .config import ExperimentConfig

SCHEMA_VERSION = "1.0"

CONVENTIONS = {
    "element_order": "row-major, m = (m_y - 1) * M_x + m_x",
    "angles": "degrees in configuration, radians internally",
    "pilot": "s = 1, path loss omitted",
    "noise": "noise_var is per real quadrature; each estimate gets total power 2 * noise_var",
    "snr": "SNR = M / (2 * noise_var), M = element count (CIPS channel variance), same for every scheme",
    "skr": "complex Gaussian rate log2(1 + (s/2) / (2n + 2n^2/s)); 1-bit DIPS uses per-quadrature "
           "terms with a 1/2 factor unless skr_eq29_verbatim",
}


@dataclass
class Report:
    config: dict
    analytic: dict
    empirical: dict
    gof: dict
    mi: dict | None
    verdicts: list
    sweep: list | None = None
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts) and all(r["pass"] for r in self.sweep or [])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "generator": {"package": "ris_keygen", "version": __version__,
                          "numpy": np.__version__, "scipy": scipy.__version__},
            "config": self.config,
            "conventions": CONVENTIONS,
            "analytic": self.analytic,
            "empirical": self.empirical,
            "gof": self.gof,
            "mi": self.mi,
            "sweep": self.sweep,
            "verdicts": self.verdicts,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def _verdict(name, value, expected, tolerance) -> dict:
    return {
        "name": name,
        "value": value,
        "expected": expected,
        "tolerance": tolerance,
        "passed": bool(abs(value - expected) <= tolerance),
    }


def geometry_for_size(m: int, like: RisGeometry) -> RisGeometry:
    """Square array when ``m`` is a perfect square, else an ``m x 1`` line."""
    side = math.isqrt(m)
    mx, my = (side, side) if side * side == m else (m, 1)
    return replace(like, m_x_count=mx, m_y_count=my)


def gof_checks(batch: SampleBatch, prediction: AnalyticPrediction, alpha: float, n: int) -> dict:
    """KS tests of magnitude, phase and quadratures on the first ``n`` trials."""
    h = batch.samples[:n]
    out = {}
    laws = {}
    try:
        ref = reference_cdfs(prediction)
        laws["magnitude"] = (np.abs(h), ref.magnitude)
        if ref.phase is not None:
            laws["phase"] = (wrap_phase(np.angle(h)), ref.phase)
    except NoClosedForm:
        pass
    real_cdf, imag_cdf = quadrature_cdfs(prediction)
    floor = 1e-9 * max(prediction.var_total, 1.0)
    if prediction.var_re > floor:
        laws["real"] = (h.real, real_cdf)
    if prediction.var_im > floor:
        laws["imag"] = (h.imag, imag_cdf)
    for name, (x, cdf) in laws.items():
        if len(x) < 10:
            continue
        out[name] = ks_test(np.sort(x), cdf, alpha).to_dict()
    return out


def _mi_block(batch: SampleBatch, config: ExperimentConfig) -> tuple[dict, list]:
    model = batch.model
    tol = config.tolerances
    n = min(tol.mi_samples, batch.trial_count)
    est = mi_knn(batch.y_a[:n], batch.y_b[:n], tol.mi_k)
    skr = skr_closed_form(model.scheme, model.geometry, model.legit_angles,
                          model.noise_var_per_quadrature, config.skr_eq29_verbatim)
    pred = predict_distribution(model.scheme, model.geometry, model.legit_angles)
    exact = gaussian_mi_bits(pred.var_re, pred.var_im, pred.covariance, model.noise_var_per_quadrature)
    verbatim = skr_per_quadrature(pred.var_re, pred.var_im, model.noise_var_per_quadrature, verbatim=True)
    block = {
        **est.to_dict(),
        "analytic": skr.to_dict(),
        "gaussian_exact_bits": exact,
        "eq29_verbatim_bits": verbatim,
        "snr_db": 10 * math.log10(model.geometry.size / (2 * model.noise_var_per_quadrature)),
    }
    verdicts = [_verdict("mi_vs_gaussian_rate", est.bits, exact, tol.mi_bits)]
    return block, verdicts


def evaluate(batch: SampleBatch, config: ExperimentConfig) -> tuple[dict, dict, dict, dict | None, list]:
    model = batch.model
    tol = config.tolerances
    pred = predict_distribution(model.scheme, model.geometry, model.legit_angles, model.direct_gain)
    summ = empirical_summary(batch)
    t = summ.n
    floor = 1e-9 * max(pred.var_total, 1.0)
    verdicts = [
        _verdict("var_total", summ.var_total, pred.var_total, tol.var_rel * pred.var_total),
        _verdict("var_re", summ.var_re, pred.var_re, max(tol.var_rel * pred.var_re, floor)),
        _verdict("var_im", summ.var_im, pred.var_im, max(tol.var_rel * pred.var_im, floor)),
        _verdict("mean_re", summ.mean_re, pred.mean_re,
                 max(tol.mean_sigmas * math.sqrt(pred.var_re / t), floor)),
        _verdict("mean_im", summ.mean_im, pred.mean_im,
                 max(tol.mean_sigmas * math.sqrt(pred.var_im / t), floor)),
        _verdict("covariance", summ.covariance, pred.covariance,
                 max(tol.cov_sigmas * math.sqrt((pred.var_re * pred.var_im + pred.covariance ** 2) / t),
                     floor)),
    ]
    gof = gof_checks(batch, pred, tol.ks_alpha, tol.ks_samples)
    for name, res in gof.items():
        verdicts.append({"name": f"ks_{name}", "value": res["statistic"], "expected": 0.0,
                         "tolerance": res["critical_value"], "passed": res["passed"]})
    analytic = {"prediction": pred.to_dict(), "skr": None}
    mi = None
    if model.noise_var_per_quadrature > 0:
        analytic["skr"] = skr_closed_form(model.scheme, model.geometry, model.legit_angles,
                                          model.noise_var_per_quadrature,
                                          config.skr_eq29_verbatim).to_dict()
        if config.estimate_mi:
            mi, mi_verdicts = _mi_block(batch, config)
            verdicts += mi_verdicts
    return analytic, summ.to_dict(), gof, mi, verdicts


def _sweep_model(model: ChannelModel, parameter: str, value) -> ChannelModel:
    if parameter == "M":
        return replace(model, geometry=geometry_for_size(int(value), model.geometry))
    if parameter == "q":
        return replace(model, scheme=PhaseScheme.cgps(int(value), model.scheme.allow_remainder))
    if parameter == "bits":
        return replace(model, scheme=PhaseScheme.dips(int(value)))
    return replace(model, noise_var_per_quadrature=noise_var_from_snr_db(value, model.geometry.size))


def run_sweep(config: ExperimentConfig) -> list[dict]:
    sw = config.sweep
    tol = config.tolerances
    rows = []
    for value in sw.values:
        model = _sweep_model(config.model, sw.parameter, value)
        if sw.parameter == "snr_db":
            trials = min(config.trials, tol.mi_samples)
            batch = sample_batch(model, trials, config.seed, config.shards, config.workers)
            est = mi_knn(batch.y_a, batch.y_b, tol.mi_k).bits
            pred = predict_distribution(model.scheme, model.geometry, model.legit_angles)
            analytic = gaussian_mi_bits(pred.var_re, pred.var_im, pred.covariance,
                                        model.noise_var_per_quadrature)
            tolerance = tol.mi_bits
        else:
            batch = sample_batch(model, config.trials, config.seed, config.shards, config.workers)
            est = empirical_summary(batch).var_total
            analytic = predict_distribution(model.scheme, model.geometry, model.legit_angles).var_total
            tolerance = tol.var_rel * analytic
        rows.append({"x": value, "empirical": est, "analytic": analytic, "tolerance": tolerance,
                     "pass": bool(abs(est - analytic) <= tolerance)})
    return rows


def run_experiment(config: ExperimentConfig) -> Report:
    """Generate samples, summarize, attach predictions, judge, and write outputs.

    Output files (when ``config.out_dir`` is set): ``samples.csv``,
    optionally ``observations.csv``, ``sweep.csv`` for sweeps, and
    ``report.json``.  ``OSError`` propagates for I/O failures.
    """
    batch = sample_batch(config.model, config.trials, config.seed, config.shards, config.workers)
    analytic, empirical, gof, mi, verdicts = evaluate(batch, config)
    sweep = run_sweep(config) if config.sweep is not None else None
    report = Report(config.echo(), analytic, empirical, gof, mi, verdicts, sweep)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if config.write_samples:
            report.files.append(str(write_samples_csv(batch, out / "samples.csv")))
        if config.write_observations:
            report.files.append(str(write_observations_csv(batch, out / "observations.csv")))
        if sweep is not None:
            report.files.append(str(write_sweep_csv(sweep, out / "sweep.csv")))
        path = out / "report.json"
        path.write_text(report.to_json())
        report.files.append(str(path))
    return report


def write_sweep_csv(rows: list[dict], path: str | Path) -> Path:
    """Columns ``x,empirical,analytic,tolerance,pass``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "empirical", "analytic", "tolerance", "pass"])
        for r in rows:
            writer.writerow([r["x"], repr(float(r["empirical"])), repr(float(r["analytic"])),
                             repr(float(r["tolerance"])), str(r["pass"]).lower()])
    return path
