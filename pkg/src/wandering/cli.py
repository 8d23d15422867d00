"""Command line front end.

    wandering run --config baker1976.cfg --out results/

Subcommands: gen, crit, verify, classify, render, run, report.  Outputs are
written only when the whole command succeeds.  Exit status is 0 on success,
2 for invalid input, 3 when a quantity leaves the double range.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, config, kernels
from .classify import classification_csv, trichotomy
from .critical import critical_csv, critical_value_ratio, locate
from .errors import FamilyOverflowError, SkippedSmallK, ValidationError, WanderingError
from .evaluator import EvalConfig
from .families import build, recurrence_residuals
from .render import RenderSpec, colorize, layers, sidecar, to_ppm
from .verify import find_epsilon, summary_csv, verify_any

SEED_TOL = 1e-12
SUMMARY = "summary.json"


def _clean(x):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n"


def _map(fn, items, threads):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


class Pipeline:
    """One experiment: each stage computes on demand and caches its result."""

    def __init__(self, cfg: config.ExperimentConfig, threads: int = 1, seed_check: bool = False):
        self.cfg = cfg
        self.threads = max(1, int(threads))
        self.seed_check = seed_check
        self.files = {}
        self._seq = self._crit = self._eps = self._verify = self._cls = None

    @property
    def provenance(self) -> dict:
        return {"config_hash": self.cfg.digest, "version": __version__, "name": self.cfg.name,
                "backend": kernels.backend_name()}

    # stages -----------------------------------------------------------------

    @property
    def seq(self):
        if self._seq is None:
            seq = build(self.cfg.family)
            k_lo, k_hi = self.cfg.window
            if k_lo < seq.first or k_hi + 1 > seq.last:
                raise ValidationError(
                    f"window [{k_lo}, {k_hi}] needs zeros {k_lo} .. {k_hi + 1}; "
                    f"the sequence has {seq.first} .. {seq.last}")
            if self.seed_check:
                res = recurrence_residuals(seq)
                worst = float(res.max()) if res.size else 0.0
                if worst > SEED_TOL:
                    raise ValidationError(f"recurrence residual {worst:.3g} exceeds {SEED_TOL:g}")
            self._seq = seq
        return self._seq

    def _ks(self, extra=0):
        k_lo, k_hi = self.cfg.window
        return [k for k in range(k_lo, k_hi + 1 + extra) if self.seq.has(k + 1)]

    @property
    def crit(self) -> dict:
        if self._crit is None:
            seq, ev = self.seq, self.cfg.eval

            def one(k):
                try:
                    return k, locate(seq, k, ev), None
                except WanderingError as exc:
                    return k, None, f"{type(exc).__name__}: {exc}"

            rows = _map(one, self._ks(extra=1), self.threads)
            self._crit = {k: cp for k, cp, _ in rows if cp is not None}
            self._crit_errors = {k: e for k, _, e in rows if e is not None}
        return self._crit

    @property
    def eps(self) -> dict:
        if self._eps is None:
            seq, ev = self.seq, self.cfg.eval
            if seq.kind not in ("theorem4", "baker1976"):
                self._eps = {}
            else:
                ks = self._ks(extra=1)
                vals = _map(lambda k: find_epsilon(seq, k, ev), ks, self.threads)
                self._eps = {k: e for k, e in zip(ks, vals) if e is not None}
        return self._eps

    @property
    def verify(self) -> list:
        if self._verify is None:
            seq, ev, eps = self.seq, self.cfg.eval, self.eps

            def one(k):
                try:
                    return verify_any(seq, k, ev, epsilon=eps.get(k))
                except SkippedSmallK as exc:
                    return {"k": k, "skipped": str(exc)}

            self._verify = _map(one, self._ks(), self.threads)
        return self._verify

    @property
    def classification(self):
        if self._cls is None:
            self._cls = trichotomy(self.seq, self.cfg.window, self.cfg.margin,
                                   crit=self.crit, eps=self.eps, cfg=self.cfg.eval)
        return self._cls

    # outputs ----------------------------------------------------------------

    def out_sequence(self):
        seq = self.seq
        self.files["sequence.csv"] = seq.to_csv()
        doc = {"provenance": self.provenance, "family": seq.family.to_dict(),
               "first": seq.first, "last": seq.last, "k0": seq.k0,
               "growth_index": seq.growth_index, "trend": seq.trend,
               "max_residual": seq.max_residual}
        if self.seed_check:
            res = recurrence_residuals(seq)
            doc["seed_check"] = {"max_residual": float(res.max()) if res.size else 0.0,
                                 "tolerance": SEED_TOL}
        self.files["sequence.json"] = dumps(doc)

    def out_critical(self):
        seq = self.seq
        pts = [self.crit[k] for k in sorted(self.crit)]
        self.files["critical.csv"] = critical_csv(pts)
        recs = []
        for cp in pts:
            r = {"k": cp.k, "base": cp.base, "w": cp.w, "delta_k": cp.delta_k,
                 "delta_imag": cp.delta_imag, "log_fc": cp.log_fc, "ratio_next": cp.ratio_next,
                 "residual": cp.residual, "method": cp.method}
            if seq.kind != "theorem2":
                r["value_ratio_log"] = critical_value_ratio(seq, cp)
            recs.append(r)
        self.files["critical.json"] = dumps({"provenance": self.provenance, "points": recs,
                                             "errors": self._crit_errors})

    def out_verify(self):
        reps = self.verify
        done = [r for r in reps if not isinstance(r, dict)]
        self.files["verify.csv"] = summary_csv(done)
        self.files["verify.json"] = dumps({
            "provenance": self.provenance,
            "reports": [r if isinstance(r, dict) else r.to_dict() for r in reps],
            "epsilon": {str(k): v for k, v in sorted(self.eps.items())}})

    def out_classification(self):
        cls = self.classification
        self.files["classification.csv"] = classification_csv(self.seq, cls)
        doc = cls.to_dict()
        doc["provenance"] = self.provenance
        doc["window"] = list(self.cfg.window)
        doc["margin"] = self.cfg.margin
        self.files["classification.json"] = dumps(doc)

    def render_spec(self) -> RenderSpec:
        r = self.cfg.render
        if r is None:
            raise ValidationError("config has no [outputs.render] section")
        if "lo" in r:
            lo, hi = r["lo"], r["hi"]
        else:
            lo = self.seq.L(r["ring_lo"]) - r["pad"]
            hi = self.seq.L(r["ring_hi"]) + r["pad"]
        return RenderSpec(lo, hi, r["width"], r["height"], r["max_iter"], r["target_ring"])

    def out_render(self):
        spec = self.render_spec()
        lay, st = layers(self.seq, spec, self.cfg.eval, self.threads)
        self.files["render.ppm"] = to_ppm(colorize(lay, st))
        side = json.loads(sidecar(spec, self.seq, lay, st))
        side["provenance"] = self.provenance
        self.files["render.json"] = dumps(side)

    def run_all(self):
        o = self.cfg.outputs
        if o["sequence_csv"]:
            self.out_sequence()
        if o["critical_csv"]:
            self.out_critical()
        if o["verify_json"]:
            self.out_verify()
        if o["classification_json"]:
            self.out_classification()
        if self.cfg.render is not None:
            self.out_render()
        self.files["run.json"] = dumps({"provenance": self.provenance,
                                        "files": sorted(self.files)})


# ---------------------------------------------------------------------------
# report

def merge_reports(out: Path) -> str:
    docs = {}
    for p in sorted(out.glob("*.json")):
        if p.name == SUMMARY:
            continue
        try:
            docs[p.name] = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{p.name} is not valid JSON: {exc}") from None
    if not docs:
        raise ValidationError(f"no JSON reports in {out}")
    prov = sorted({d.get("provenance", {}).get("config_hash", "") for d in docs.values()
                   if isinstance(d, dict)} - {""})
    cls = docs.get("classification.json", {})
    head = {key: cls[key] for key in ("connectivity", "uniformly_perfect", "clustering") if key in cls}
    ver = docs.get("verify.json", {}).get("reports", [])
    if ver:
        head["verified"] = sum(1 for r in ver if r.get("pass"))
        head["checked"] = len(ver)
    return dumps({"config_hashes": prov, "version": __version__, "headline": head,
                  "reports": docs})


# ---------------------------------------------------------------------------
# entry point

def _write(files: dict, out: Path):
    """Write everything into a scratch directory first, then move it in place."""
    out.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".partial-", dir=out))
    try:
        for name, data in files.items():
            mode = "wb" if isinstance(data, bytes) else "w"
            with open(tmp / name, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
                fh.write(data)
        for name in files:
            os.replace(tmp / name, out / name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


def _diag(kind, exc, code):
    d = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit": code}
    idx = getattr(exc, "index", None)
    if idx is not None:
        d["index"] = idx
    sys.stderr.write(json.dumps(d, sort_keys=True) + "\n")
    return code


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment file, or the name of a bundled config")
    common.add_argument("--out", default=os.environ.get("WANDERING_OUT", "."),
                        help="output directory (default: $WANDERING_OUT or .)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--samples", type=int, help="samples per circle (power of two)")
    common.add_argument("--seed-check", action="store_true",
                        help="re-verify the recurrence residuals of the zero sequence")
    p = argparse.ArgumentParser(prog="wandering", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--backend", choices=sorted(kernels.BACKENDS), help="kernel implementation")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("gen", "zero sequence"), ("crit", "critical points"),
                       ("verify", "ring inclusion checks"), ("classify", "windowed classification"),
                       ("render", "escape-layer image"), ("run", "full pipeline"),
                       ("report", "merge JSON outputs in --out into summary.json")):
        sub.add_parser(name, parents=[common], help=text)
    sub.add_parser("configs", help="list bundled configs")
    return p


STAGES = {
    "gen": ("out_sequence",),
    "crit": ("out_critical",),
    "verify": ("out_verify",),
    "classify": ("out_classification",),
    "render": ("out_render",),
}


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    if args.backend:
        kernels.use_backend(args.backend)
    if args.command == "configs":
        print("\n".join(config.bundled()))
        return 0
    try:
        out = Path(args.out)
        if args.command == "report":
            _write({SUMMARY: merge_reports(out)}, out)
            return 0
        if not args.config:
            raise ValidationError("--config is required")
        cfg = config.load(args.config)
        if args.samples is not None:
            cfg.eval = EvalConfig(tail_tol=cfg.eval.tail_tol, samples=args.samples)
            cfg.raw = dict(cfg.raw, eval=dict(cfg.raw.get("eval", {}), samples=args.samples))
        pipe = Pipeline(cfg, args.threads, args.seed_check)
        if args.command == "run":
            pipe.run_all()
        else:
            for stage in STAGES[args.command]:
                getattr(pipe, stage)()
        _write(pipe.files, out)
    except FamilyOverflowError as exc:
        return _diag("overflow", exc, 3)
    except OverflowError as exc:
        return _diag("overflow", exc, 3)
    except (ValidationError, ValueError, OSError) as exc:
        return _diag("validation", exc, 2)
    except WanderingError as exc:
        return _diag("numeric", exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
