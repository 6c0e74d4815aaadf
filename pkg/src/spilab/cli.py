"""Command-line entry point ``spilab``.

Subcommands ``analyze``, ``spectrum``, ``transfer``, ``hermite`` and
``gauss-lsi``. Settings come from an optional ``--config`` file (one
``key=value`` per line, ``#`` comments) and are overridden by flags.
Artifacts are written atomically into ``--out``; each one carries the
config hash and the seed. Failures print one JSON object on stderr and exit
with a code that identifies the error class (see :data:`EXIT_CODES`).
"""

from dataclasses import asdict, dataclass, field, fields
import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import capacity, gauss_lsi, hermite, measure, orlicz, spectrum, transfer
from .errors import (
    BracketError,
    ConvergenceError,
    DomainTooSmallError,
    HypothesisError,
    InsufficientSpectrumError,
    NonFiniteError,
    NonIntegrableError,
    ParseError,
    SpiLabError,
)

SUBCOMMANDS = ("analyze", "spectrum", "transfer", "hermite", "gauss-lsi")
FORMATS = ("csv", "json", "svg")
PIPELINES = ("mc-to-spi", "spi-to-mc", "spi-to-poincare", "ospi-to-mc", "ospi-to-spi")


class ConfigError(SpiLabError):
    """Invalid run configuration."""


# order matters: subclasses before their bases
EXIT_CODES = (
    (ConfigError, 2),
    (ParseError, 3),
    (HypothesisError, 4),
    (InsufficientSpectrumError, 5),
    (BracketError, 6),
    (ConvergenceError, 6),
    (NonIntegrableError, 7),
    (DomainTooSmallError, 7),
    (NonFiniteError, 8),
    (SpiLabError, 9),
    (OSError, 10),
    (ValueError, 11),
)


def exit_code_for(exc):
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def parse_potential_expr(src):
    """Potential from expression text such as ``"x^2/2"`` or ``"abs(x)^1.5"``.

    Raises
    ------
    ParseError
        With the offending character offset in ``position``.
    """
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    return measure.expression(src)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    preset_params: list = field(default_factory=list)
    expr: str | None = None
    domain: list | None = None
    nodes: int = 2001
    k: int = 6
    p_set: list = field(default_factory=lambda: [3.0, 4.0, 6.0, 8.0, 12.0])
    kappa_grid: list | None = None
    r_grid: list | None = None
    d: list = field(default_factory=lambda: [1, 2, 5, 10])
    seed: int = 0
    trials: int = 200
    n_max: int = 40
    ess_threshold: float | None = None
    pipeline: str | None = None
    input: str | None = None
    c_poincare: float | None = None
    b_star: float | None = None
    c_const: float | None = None
    c_lsi: float = 2.0
    out: str = "."
    format: str = "json"

    def validate(self):
        if self.command not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.preset is not None and self.expr is not None:
            raise ConfigError("give either preset or expr, not both")
        for name in ("p_set", "kappa_grid", "r_grid", "d"):
            g = getattr(self, name)
            if g is None:
                continue
            if len(g) == 0:
                raise ConfigError(f"{name} must be nonempty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ConfigError(f"{name} must be strictly ascending")
        if self.domain is not None and not self.domain[0] < self.domain[1]:
            raise ConfigError("domain needs lo < hi")
        if self.nodes < 16 or self.k < 1 or self.trials < 1 or self.n_max < 5:
            raise ConfigError("nodes >= 16, k >= 1, trials >= 1 and n_max >= 5 are required")
        if self.command == "transfer":
            if self.pipeline not in PIPELINES:
                raise ConfigError(f"transfer needs pipeline in {', '.join(PIPELINES)}")
            if not self.input:
                raise ConfigError("transfer needs an input file")
        return self

    def hashed(self):
        """Fields that define the computation (the output directory does not)."""
        d = asdict(self)
        d.pop("out")
        return d

    def config_hash(self):
        text = _dumps(self.hashed())
        return hashlib.sha256(text.encode()).hexdigest()


def _float_list(text):
    text = text.strip()
    if text.startswith(("geom:", "lin:")):
        kind, lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
        g = np.geomspace(lo, hi, n) if kind == "geom" else np.linspace(lo, hi, n)
        return [float(v) for v in g]
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _domain(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"domain must look like lo:hi, got {text!r}")
    return [float(parts[0]), float(parts[1])]


def _opt_float(text):
    return None if text.lower() in ("", "none") else float(text)


_CONVERTERS = {
    "preset_params": _float_list,
    "domain": _domain,
    "nodes": int,
    "k": int,
    "p_set": _float_list,
    "kappa_grid": _float_list,
    "r_grid": _float_list,
    "d": _int_list,
    "seed": int,
    "trials": int,
    "n_max": int,
    "ess_threshold": _opt_float,
    "c_poincare": _opt_float,
    "b_star": _opt_float,
    "c_const": _opt_float,
    "c_lsi": float,
}


def _convert(key, raw):
    try:
        conv = _CONVERTERS.get(key, str)
        return conv(raw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def read_config_file(path):
    """``key=value`` lines; keys may use dashes or underscores."""
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, raw = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _convert(key, raw)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    ap = _Parser(prog="spilab", description="Functional-inequality laboratory for 1D measures.")
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key=value settings file; flags override it")
    ap.add_argument("--preset", choices=[p for p in measure.PRESETS if p != "expression"])
    ap.add_argument("--preset-params", help="comma-separated preset parameters")
    ap.add_argument("--expr", help="potential V(x) as an expression, e.g. 'x^2/2'")
    ap.add_argument("--domain", help="truncation interval lo:hi")
    ap.add_argument("--nodes")
    ap.add_argument("--k", help="number of eigenpairs")
    ap.add_argument("--p-set", help="exponents, comma list or geom:lo:hi:n / lin:lo:hi:n")
    ap.add_argument("--kappa-grid")
    ap.add_argument("--r-grid")
    ap.add_argument("--d", help="dimensions, comma list")
    ap.add_argument("--seed")
    ap.add_argument("--trials")
    ap.add_argument("--n-max")
    ap.add_argument("--ess-threshold")
    ap.add_argument("--pipeline", choices=PIPELINES)
    ap.add_argument("--input", help="JSON input for transfer")
    ap.add_argument("--c-poincare")
    ap.add_argument("--b-star")
    ap.add_argument("--c-const")
    ap.add_argument("--c-lsi")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=FORMATS)
    return ap


def config_from_args(argv):
    ns = build_parser().parse_args(argv)
    settings = read_config_file(ns.config) if ns.config else {}
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        raw = getattr(ns, f.name, None)
        if raw is not None:
            settings[f.name] = raw if f.name in ("preset", "pipeline", "format") else _convert(f.name, raw)
    return RunConfig(command=ns.command, **settings).validate()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _fmt_float(v):
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    s = "%.17g" % v
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _dumps(obj, indent=0):
    """JSON text with sorted keys and floats at 17 significant digits;
    non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dumps(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_text(header, rows, cfg):
    buf = io.StringIO()
    buf.write(f"# config_hash={cfg.config_hash()} seed={cfg.seed}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_float(float(v)).strip('"') for v in row) + "\n")
    return buf.getvalue()


def _svg_text(title, header, rows, logx=False, logy=False):
    """Line plot of every column against the first one."""
    w, h, pad = 640, 400, 50
    data = np.array(rows, dtype=float)
    x = data[:, 0]
    ys = data[:, 1:]
    tx = np.log10(x) if logx else x
    with np.errstate(divide="ignore", invalid="ignore"):
        ty = np.log10(ys) if logy else ys
    ok = np.isfinite(ty)
    if not ok.any():
        ty = np.zeros_like(ys)
        ok = np.ones_like(ys, dtype=bool)
    x0, x1 = float(np.min(tx)), float(np.max(tx))
    y0, y1 = float(np.min(ty[ok])), float(np.max(ty[ok]))
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (w - 2 * pad)

    def sy(v):
        return h - pad - (v - y0) / (y1 - y0) * (h - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{w - 2 * pad}" height="{h - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{pad}" y="{h - 15}" font-size="11">{header[0]}{" (log10)" if logx else ""}: '
        f"{x0:.4g} .. {x1:.4g}</text>",
        f'<text x="5" y="{pad - 8}" font-size="11">{"log10 " if logy else ""}{y0:.4g} .. {y1:.4g}</text>',
    ]
    for j in range(ys.shape[1]):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b, good in zip(tx, ty[:, j], ok[:, j]) if good)
        c = colors[j % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{w - pad - 120}" y="{pad + 15 * (j + 1)}" font-size="11" fill="{c}">{header[j + 1]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class Artifacts:
    """Outputs of a subcommand before they are written."""

    name: str
    result: dict
    tables: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)

    def render(self, cfg):
        """``{filename: text}`` for the configured format."""
        files = {}
        doc = {"config": cfg.hashed(), "config_hash": cfg.config_hash(), "seed": cfg.seed, "result": self.result}
        files[f"{self.name}.json"] = _dumps(doc) + "\n"
        if cfg.format in ("csv", "svg"):
            for tname, (header, rows) in self.tables.items():
                files[f"{tname}.csv"] = _csv_text(header, rows, cfg)
        if cfg.format == "svg":
            for tname, (title, logx, logy) in self.plots.items():
                header, rows = self.tables[tname]
                files[f"{tname}.svg"] = _svg_text(title, header, rows, logx, logy)
        return files


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _measure(cfg, default_preset="gaussian"):
    if cfg.expr is not None:
        pot = parse_potential_expr(cfg.expr)
    else:
        pot = measure.preset(cfg.preset or default_preset, cfg.preset_params)
    dom = tuple(cfg.domain) if cfg.domain is not None else None
    return measure.build_measure(pot, dom, cfg.nodes)


def _measure_info(m):
    return {"domain": [float(m.nodes[0]), float(m.nodes[-1])], "nodes": int(m.nodes.size), "median": measure.median(m)}


def run_analyze(cfg):
    m = _measure(cfg)
    grid = cfg.kappa_grid or [float(v) for v in np.geomspace(1e-8, 0.5, 25)]
    if max(grid) > 0.5:
        raise ConfigError("kappa_grid must stay within (0, 1/2]")
    if grid[-1] != 0.5:
        grid = grid + [0.5]
    prof = capacity.capacity_profile(m, np.asarray(grid))
    lo, hi = capacity.poincare_from_mc(prof)
    result = {
        "measure": _measure_info(m),
        "poincare_interval": [lo, hi],
        "c_half": prof.value_at(0.5),
        "profile": prof.to_dict(),
    }
    rows = list(zip(prof.kappa, prof.c_kappa))
    return Artifacts(
        "analyze",
        result,
        {"analyze_profile": (["kappa", "c_kappa"], rows)},
        {"analyze_profile": ("capacity profile", True, False)},
    )


def run_spectrum(cfg):
    m = _measure(cfg)
    spec = spectrum.low_spectrum(m, cfg.k, ess_threshold=cfg.ess_threshold)
    ev = spec.eigenvalues
    if cfg.r_grid is not None:
        r_grid = np.asarray(cfg.r_grid)
    else:
        top = ev[-1] if ev[-1] > 0 else 1.0
        r_grid = np.geomspace(1.01 / top, max(10.0, 2.02 / top), 20)
    p = cfg.p_set[0] if cfg.p_set else 4.0
    pair = orlicz.power_pair(p)
    ospi = spectrum.spectral_ospi(spec, pair, r_grid)
    spi = spectrum.spectral_spi(spec, r_grid)
    checks = []
    for r in r_grid:
        if not r > ospi.beta.r0:
            continue
        rep = spectrum.verify_spi(m, ospi, float(r), cfg.trials, cfg.seed, generator=spec.generator)
        checks.append(rep.to_dict())
    result = {
        "measure": _measure_info(m),
        "eigenvalues": ev,
        "residuals": spec.residuals(),
        "p": p,
        "ospi_beta": ospi.beta.to_dict(),
        "spi_beta": spi.to_dict(),
        "verification": checks,
        "all_passed": all(c["passed"] for c in checks),
    }
    header = ["x"] + [f"f{i}" for i in range(spec.k)]
    rows = np.column_stack([spec.nodes, spec.eigenvectors]).tolist()
    beta_rows = list(zip(r_grid, ospi.beta(r_grid), spi(r_grid)))
    return Artifacts(
        "spectrum",
        result,
        {"spectrum_eigenvectors": (header, rows), "spectrum_beta": (["r", "ospi_beta", "spi_beta"], beta_rows)},
        {"spectrum_beta": ("spectral beta", True, True)},
    )


def _load_input(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if "result" in doc and isinstance(doc["result"], dict):
        doc = doc["result"]

    # float() also reads the "inf" / "nan" strings used for non-finite values
    return doc, float


def _section(doc, key):
    """``doc[key]`` when it is a nested object, else ``doc`` itself."""
    sub = doc.get(key)
    return sub if isinstance(sub, dict) else doc


def run_transfer(cfg):
    doc, num = _load_input(cfg.input)
    p = cfg.p_set[0] if cfg.p_set else 4.0
    pipe = cfg.pipeline
    kappa_grid = None if cfg.kappa_grid is None else np.asarray(cfg.kappa_grid)
    result = {"pipeline": pipe}
    tables = {}
    if pipe == "mc-to-spi":
        prof_doc = _section(doc, "profile")
        c_lim = prof_doc.get("c_limit")
        prof = capacity.CapacityProfile(
            np.array([num(v) for v in prof_doc["kappa"]]),
            np.array([num(v) for v in prof_doc["c_kappa"]]),
            None if c_lim is None else num(c_lim),
        )
        beta = transfer.mc_to_spi(prof)
        d = beta.to_dict()
        result["beta"] = d
        tables["transfer"] = (["r", "beta"], list(zip(d["r"], d["beta"])))
    else:
        bdoc = _section(doc, "beta")
        beta = transfer.BetaFunction.from_table(
            np.array([num(v) for v in bdoc["r"]]), np.array([num(v) for v in bdoc["beta"]]), r0=num(bdoc.get("r0", 0.0))
        )
        if pipe == "spi-to-poincare":
            result["poincare"] = transfer.spi_to_poincare(beta)
        else:
            if cfg.c_poincare is None:
                raise ConfigError(f"{pipe} needs c_poincare")
            kw = {} if cfg.b_star is None else {"b_star": cfg.b_star}
            if pipe == "spi-to-mc":
                prof = transfer.spi_to_mc(beta, cfg.c_poincare, kappa_grid=kappa_grid, **kw)
            else:
                ospi = transfer.OrliczSpi(beta, orlicz.power_pair(p))
                if pipe == "ospi-to-mc":
                    prof = transfer.ospi_to_mc(ospi, cfg.c_poincare, kappa_grid=kappa_grid, **kw)
                else:
                    new = transfer.ospi_to_spi(ospi, cfg.c_poincare, kappa_grid=kappa_grid, **kw)
                    d = new.to_dict()
                    result["beta"] = d
                    result["r0"] = new.r0
                    tables["transfer"] = (["r", "beta"], list(zip(d["r"], d["beta"])))
                    prof = None
            if prof is not None:
                result["profile"] = prof.to_dict()
                tables["transfer"] = (["kappa", "c_kappa"], list(zip(prof.kappa, prof.c_kappa)))
    return Artifacts("transfer", result, tables, {k: ("transfer", True, True) for k in tables})


def run_hermite(cfg):
    n_max = cfg.n_max
    table, c_sup = hermite.audit_lp_bound(n_max, cfg.p_set)
    l2 = [hermite.lp_norm(n, 2.0) for n in range(n_max + 1)]
    result = {
        "l2_norms": l2,
        "audit": {"n": table["n"], "p": table["p"], "c": table["c"], "norm": table["norm"]},
        "c_sup": c_sup,
    }
    if n_max >= 20:
        result["c_sup_10_20"] = hermite.c_sup_over(table, 10, 20)
        result["c_sup_20_max"] = hermite.c_sup_over(table, 20, n_max)
    pr = []
    for n in (100, 200, 400):
        pr.append({"n": n, "calibration": hermite.calibration(n), "window_error_phi_0.5": hermite.window_error(n, 0.5)})
    result["plancherel_rotach"] = pr
    header = ["n"] + [f"c_p{p:g}" for p in table["p"]]
    rows = [[n] + list(row) for n, row in zip(table["n"], table["c"])]
    return Artifacts("hermite", result, {"hermite_audit": (header, rows)}, {"hermite_audit": ("c(n, p)", False, False)})


def run_gauss_lsi(cfg):
    ds = cfg.d
    ps = [2.0 * d + 3.0 for d in ds]
    c = cfg.c_const if cfg.c_const is not None else gauss_lsi.default_c_const(ps, cfg.n_max)
    family = [gauss_lsi.GaussChainParams(d=d, p=p, c_const=c) for d, p in zip(ds, ps)]
    rep = gauss_lsi.chain_report(family)
    m = measure.build_measure(measure.gaussian(), (-10.0, 10.0), max(cfg.nodes, 2000))
    lsi = gauss_lsi.lsi_defect_check(m, cfg.c_lsi, cfg.trials, cfg.seed)
    result = {"c_const": c, "chain": rep.to_dict(), "lsi": lsi.to_dict()}
    rows = [(r["log_inv_kappa"], r["c_kappa_chain"], r["log_over_32"]) for r in rep.rows]
    return Artifacts(
        "gauss_lsi",
        result,
        {"gauss_lsi_chain": (["log_inv_kappa", "c_kappa_chain", "log_over_32"], rows)},
        {"gauss_lsi_chain": ("C_kappa chain", False, False)},
    )


RUNNERS = {
    "analyze": run_analyze,
    "spectrum": run_spectrum,
    "transfer": run_transfer,
    "hermite": run_hermite,
    "gauss-lsi": run_gauss_lsi,
}


def run_subcommand(cfg):
    """Run ``cfg.command`` and write its artifacts; returns the written paths."""
    arts = RUNNERS[cfg.command](cfg)
    files = arts.render(cfg)
    paths = []
    for name in sorted(files):
        path = os.path.join(cfg.out, name)
        write_atomic(path, files[name])
        paths.append(path)
    return paths


def _report_error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    pos = getattr(exc, "position", None)
    if pos is not None:
        payload["position"] = pos
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv=None):
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        paths = run_subcommand(cfg)
    except SystemExit:
        raise
    except Exception as exc:  # mapped to an exit code, reported as JSON
        code = exit_code_for(exc)
        _report_error(exc, code)
        return code
    for p in paths:
        sys.stdout.write(p + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
