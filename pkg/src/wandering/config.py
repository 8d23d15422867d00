"""Experiment files: TOML (or JSON with the same keys), ``schema = 1``.

Numeric fields may be strings holding small arithmetic expressions in the
names ``e``, ``pi`` and ``absC`` (|C|, available once C is known) and the
functions ``exp``, ``log`` and ``sqrt``::

    schema = 1
    name = "baker1976"

    [family]
    kind = "baker1976"
    C = "1/(4*e)"
    N = 2
    r1 = 11
    k_max = 84

    [family.p_rule]            # theorem4 only
    kind = "harmonic"          # constant | harmonic | power | table | harmonic_cycle
    c = "absC/(4*e)"

    [window]
    k_lo = 10
    k_hi = 80

    [eval]
    tail_tol = 1e-12
    samples = 4096

    [outputs]
    sequence_csv = true
    critical_csv = true
    verify_json = true
    classification_json = true

    [outputs.render]
    ring_lo = 20               # or lo/hi in log|z| directly
    ring_hi = 23
    width = 256
    height = 128
    max_iter = 40
    target_ring = 26
"""
from __future__ import annotations

import ast
import hashlib
import json
import math
import operator
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .evaluator import EvalConfig
from .families import FamilySpec, PhaseRule, PRule
from .logspace import LogComplex

SCHEMA = 1
OUTPUT_KEYS = ("sequence_csv", "critical_csv", "verify_json", "classification_json")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"exp": math.exp, "log": math.log, "sqrt": math.sqrt}


def safe_eval(expr, names=None) -> float:
    """Evaluate a number or an arithmetic expression string."""
    if isinstance(expr, bool):
        raise ValidationError(f"expected a number, got {expr!r}")
    if isinstance(expr, (int, float)):
        return expr
    if not isinstance(expr, str):
        raise ValidationError(f"expected a number or expression, got {expr!r}")
    env = {"e": math.e, "pi": math.pi}
    env.update(names or {})

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name) and node.id in env:
            return env[node.id]
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValidationError(f"unsupported expression element in {expr!r}")

    try:
        tree = ast.parse(expr, mode="eval")
        return ev(tree)
    except (SyntaxError, ArithmeticError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad expression {expr!r}: {exc}") from None


@dataclass
class ExperimentConfig:
    name: str
    family: FamilySpec
    window: tuple
    eval: EvalConfig
    margin: float
    outputs: dict
    render: dict | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def digest(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _table(d, key, required=True):
    v = d.get(key)
    if v is None:
        if required:
            raise ValidationError(f"missing section [{key}]")
        return {}
    if not isinstance(v, dict):
        raise ValidationError(f"[{key}] must be a table")
    return v


def _int(v, what):
    v = safe_eval(v)
    if int(v) != v:
        raise ValidationError(f"{what} must be an integer")
    return int(v)


def _allowed(d, keys, where):
    extra = sorted(set(d) - set(keys))
    if extra:
        raise ValidationError(f"unknown keys in {where}: {', '.join(extra)}")


def _p_rule(d, names):
    _allowed(d, ("kind", "c", "s", "values"), "[family.p_rule]")
    if "kind" not in d:
        raise ValidationError("p_rule needs a kind")
    return PRule(d["kind"], c=float(safe_eval(d.get("c", 1.0), names)),
                 s=float(safe_eval(d.get("s", 0.0), names)),
                 values=tuple(float(safe_eval(v, names)) for v in d.get("values", ())))


def _family(d) -> FamilySpec:
    _allowed(d, ("kind", "C", "C_arg", "N", "r1", "q0", "k_max", "k0", "p_rule", "phase_rule"),
             "[family]")
    if "kind" not in d:
        raise ValidationError("family needs a kind")
    c_abs = float(safe_eval(d.get("C", 1.0)))
    c_arg = float(safe_eval(d.get("C_arg", 0.0)))
    if not c_abs > 0:
        raise ValidationError("C is given by its modulus and must be positive")
    names = {"absC": c_abs}
    C = LogComplex(math.log(c_abs), c_arg)
    p = _p_rule(_table(d, "p_rule"), names) if "p_rule" in d else None
    ph = None
    if "phase_rule" in d:
        pd = _table(d, "phase_rule")
        ph = PhaseRule(pd.get("kind", ""), tuple(float(safe_eval(v, names)) for v in pd.get("values", ())))
    opt = {}
    for key in ("k_max", "k0", "q0"):
        if key in d:
            opt[key] = _int(d[key], key)
    r1 = float(safe_eval(d["r1"], names)) if "r1" in d else None
    return FamilySpec(d["kind"], C, N=_int(d.get("N", 0), "N"), p_rule=p, phase_rule=ph, r1=r1, **opt)


def _render(d):
    _allowed(d, ("lo", "hi", "ring_lo", "ring_hi", "pad", "width", "height", "max_iter",
                 "target_ring"), "[outputs.render]")
    out = {}
    for key in ("width", "height", "max_iter", "target_ring"):
        if key not in d:
            raise ValidationError(f"render needs {key}")
        out[key] = _int(d[key], key)
    if "lo" in d and "hi" in d:
        out["lo"], out["hi"] = float(safe_eval(d["lo"])), float(safe_eval(d["hi"]))
    elif "ring_lo" in d and "ring_hi" in d:
        out["ring_lo"], out["ring_hi"] = _int(d["ring_lo"], "ring_lo"), _int(d["ring_hi"], "ring_hi")
        out["pad"] = float(safe_eval(d.get("pad", 0.0)))
    else:
        raise ValidationError("render needs lo/hi or ring_lo/ring_hi")
    return out


def parse(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config must be a table")
    if raw.get("schema") != SCHEMA:
        raise ValidationError(f"schema must be {SCHEMA}, got {raw.get('schema')!r}")
    _allowed(raw, ("schema", "name", "family", "window", "eval", "margin", "outputs"), "top level")
    fam = _family(_table(raw, "family"))
    w = _table(raw, "window")
    _allowed(w, ("k_lo", "k_hi"), "[window]")
    k_lo, k_hi = _int(w.get("k_lo"), "k_lo"), _int(w.get("k_hi"), "k_hi")
    if k_lo < 1 or k_hi < k_lo:
        raise ValidationError("window needs 1 <= k_lo <= k_hi")
    ev = _table(raw, "eval", required=False)
    _allowed(ev, ("tail_tol", "samples"), "[eval]")
    cfg = EvalConfig(tail_tol=float(safe_eval(ev.get("tail_tol", 1e-12))),
                     samples=_int(ev.get("samples", 4096), "samples"))
    margin = float(safe_eval(raw.get("margin", 0.1)))
    if not 0 < margin < 0.5:
        raise ValidationError("margin must lie in (0, 0.5)")
    outd = _table(raw, "outputs", required=False)
    _allowed(outd, OUTPUT_KEYS + ("render",), "[outputs]")
    outputs = {key: bool(outd.get(key, True)) for key in OUTPUT_KEYS}
    render = _render(_table(outd, "render")) if "render" in outd else None
    return ExperimentConfig(str(raw.get("name", fam.kind)), fam, (k_lo, k_hi), cfg, margin,
                            outputs, render, raw)


def bundled() -> list:
    return sorted(p.name for p in resources.files("wandering").joinpath("configs").iterdir()
                  if p.name.endswith(".cfg"))


def resolve(path) -> Path:
    """A path on disk, or the name of a bundled config."""
    p = Path(path)
    if p.exists():
        return p
    cand = resources.files("wandering").joinpath("configs", p.name)
    if cand.is_file():
        return Path(str(cand))
    raise ValidationError(f"config {str(path)!r} not found (bundled: {', '.join(bundled())})")


def load(path) -> ExperimentConfig:
    p = resolve(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"config is not UTF-8: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad JSON config: {exc}") from None
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ValidationError(f"bad config syntax: {exc}") from None
    return parse(raw)
