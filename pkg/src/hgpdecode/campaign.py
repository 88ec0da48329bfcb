"""Monte Carlo campaigns: WER sweeps, threshold scans and classical code ranking.

Every grid cell gets its own seed derived from the master seed and the cell
coordinates, and trial ``i`` of a cell draws from ``trial_rng(cell_seed, i)``.
Trials run in fixed-size blocks that are consumed in block order; the
adaptive stop rule is checked only at block boundaries, so the result of a
cell does not depend on how many workers computed the blocks.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .classical import flip_decode
from .graph import TannerGraph
from .hybrid import T_MAX
from .noise import FINAL_DECODERS, IDEAL_DECODERS, ROUND_DECODERS, NoiseConfig, TrialRunner, sample_error, trial_rng
from .product import QUBIT_ORDER, CssCode, code_dimension, hypergraph_product
from .stats import ThresholdBracket, confidence_interval, estimate_threshold

log = logging.getLogger(__name__)

SCHEMA = "hgpdecode-wer/1"
CODE_SCHEMA = "hgpdecode-code/1"
CSV_COLUMNS = ("code_id", "n_qubits", "k", "decoder", "p", "T", "trials", "failures", "wer", "ci_low", "ci_high", "seed")
THRESHOLD_METHOD = "pairwise log-WER crossings, linear interpolation in p, bracket = hull of crossing grid intervals"
DEFAULT_MAX_FAILURES = 100
DEFAULT_BLOCK = 50
CI_LEVEL = 0.99


class ConfigError(ValueError):
    """Invalid campaign configuration or unreadable input file."""


# ---------------------------------------------------------------------------
# code files


@dataclass(frozen=True)
class CodeFile:
    """A product code as stored on disk: its base graph plus derived parameters."""

    path: Path
    code_id: str
    graph: TannerGraph
    n_qubits: int
    k: int
    sha256: str

    def css(self) -> CssCode:
        return hypergraph_product(self.graph)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_code_file(graph: TannerGraph, path: str | Path, code_id: str | None = None) -> CodeFile:
    """Store the product of ``graph`` as JSON with the base graph embedded."""
    path = Path(path)
    css = hypergraph_product(graph)
    text = graph.to_text()
    doc = {
        "schema": CODE_SCHEMA,
        "code_id": code_id or path.stem,
        "qubit_order": QUBIT_ORDER,
        "n_qubits": css.n_qubits,
        "k": code_dimension(css),
        "graph_sha256": _sha256(text.encode()),
        "graph": text,
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return load_code_file(path)


def load_code_file(path: str | Path) -> CodeFile:
    path = Path(path)
    try:
        raw = path.read_bytes()
        doc = json.loads(raw)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read code file {path}: {exc}") from exc
    if doc.get("schema") != CODE_SCHEMA:
        raise ConfigError(f"{path}: unknown code schema {doc.get('schema')!r}")
    if doc.get("qubit_order") != QUBIT_ORDER:
        raise ConfigError(f"{path}: qubit order {doc.get('qubit_order')!r} is not {QUBIT_ORDER!r}")
    if _sha256(doc["graph"].encode()) != doc["graph_sha256"]:
        raise ConfigError(f"{path}: embedded graph does not match its checksum")
    try:
        graph = TannerGraph.from_text(doc["graph"])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return CodeFile(path, doc["code_id"], graph, int(doc["n_qubits"]), int(doc["k"]), _sha256(raw))


# ---------------------------------------------------------------------------
# sweep configuration and results


@dataclass(frozen=True)
class SweepConfig:
    """One campaign: every code x p x T cell with a shared decoder setup.

    ``rounds`` is the grid of noisy rounds T.  An empty ``rounds`` runs the
    ideal-syndrome trial with ``decoder``; otherwise each trial is the noisy
    sampling protocol with ``decoder`` on the noisy rounds and
    ``final_decoder`` on the exact last round.
    """

    codes: tuple[str, ...]
    decoder: str
    p_grid: tuple[float, ...]
    trials: int
    rounds: tuple[int, ...] = ()
    max_failures: int | None = DEFAULT_MAX_FAILURES
    seed: int = 0
    out: str | None = None
    final_decoder: str = "heurbp-ssf"
    p_syndrome: float | None = None
    sector: str = "x"
    t_max: int = T_MAX
    block_size: int = DEFAULT_BLOCK
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "codes", tuple(str(c) for c in self.codes))
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "rounds", tuple(int(t) for t in self.rounds))
        if not self.codes:
            raise ConfigError("no code files given")
        if not self.p_grid:
            raise ConfigError("p grid is empty")
        if any(not 0.0 <= p < 1.0 for p in self.p_grid):
            raise ConfigError("every p must lie in [0, 1)")
        if self.p_syndrome is not None and not 0.0 <= self.p_syndrome < 1.0:
            raise ConfigError("p_syndrome must lie in [0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.max_failures is not None and self.max_failures < 1:
            raise ConfigError("max_failures must be at least 1")
        if any(t < 0 for t in self.rounds):
            raise ConfigError("rounds must be non-negative")
        if self.block_size < 1 or self.workers < 1 or self.t_max < 0:
            raise ConfigError("block_size and workers must be positive, t_max non-negative")
        if self.sector not in ("x", "z"):
            raise ConfigError(f"sector must be 'x' or 'z', got {self.sector!r}")
        if self.noisy:
            if self.decoder not in ROUND_DECODERS:
                raise ConfigError(f"noisy rounds need decoder in {ROUND_DECODERS}, got {self.decoder!r}")
            if self.final_decoder not in FINAL_DECODERS:
                raise ConfigError(f"final decoder must be one of {FINAL_DECODERS}, got {self.final_decoder!r}")
        elif self.decoder not in IDEAL_DECODERS:
            raise ConfigError(f"ideal-syndrome decoder must be one of {IDEAL_DECODERS}, got {self.decoder!r}")

    @property
    def noisy(self) -> bool:
        return bool(self.rounds)

    @property
    def decoder_label(self) -> str:
        if self.noisy:
            return f"{self.decoder}/{self.final_decoder}"
        return self.decoder


@dataclass(frozen=True)
class WerEstimate:
    code_id: str
    n_qubits: int
    k: int
    decoder: str
    p: float
    T: int
    trials: int
    failures: int
    wer: float
    ci_low: float
    ci_high: float
    seed: int
    meta: dict = field(default_factory=dict, compare=False)

    def row(self) -> list[str]:
        return [str(getattr(self, c)) for c in CSV_COLUMNS]


def cell_seed(master: int, code_id: str, decoder: str, p: float, T: int) -> int:
    """Stable 63-bit seed for one grid cell."""
    key = json.dumps([int(master), code_id, decoder, repr(float(p)), int(T)]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


# ---------------------------------------------------------------------------
# trial blocks

# per-process caches, filled lazily; workers inherit nothing but the config
_RUNNERS: dict[tuple[str, str, str, int], TrialRunner] = {}


def _runner_for(cell: "_Cell") -> TrialRunner:
    key = (cell.code_path, cell.code_sha256, cell.sector, cell.t_max)
    if key not in _RUNNERS:
        code = load_code_file(cell.code_path)
        if code.sha256 != cell.code_sha256:
            raise ConfigError(f"{cell.code_path} changed during the campaign")
        _RUNNERS[key] = TrialRunner(code.css(), cell.sector, cell.t_max)
    return _RUNNERS[key]


@dataclass(frozen=True)
class _Cell:
    code_path: str
    code_sha256: str
    sector: str
    t_max: int
    decoder: str
    final_decoder: str
    noisy: bool
    p: float
    p_syndrome: float | None
    T: int
    seed: int


def _run_block(cell: _Cell, start: int, stop: int) -> int:
    runner = _runner_for(cell)
    failures = 0
    noise = NoiseConfig(cell.p, cell.p_syndrome, cell.T)
    for i in range(start, stop):
        rng = trial_rng(cell.seed, i)
        if cell.noisy:
            res = runner.noisy_sampling_trial(noise, cell.decoder, cell.final_decoder, rng)
        else:
            res = runner.ideal_trial(cell.p, cell.decoder, rng)
        failures += not res.success
    return failures


def _blocks(trials: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, trials)) for s in range(0, trials, size)]


def _consume(results: Iterable[int], blocks, max_failures) -> tuple[int, int]:
    """Fold block failure counts in order until the stop rule fires."""
    trials = failures = 0
    for (start, stop), f in zip(blocks, results):
        trials += stop - start
        failures += f
        if max_failures is not None and failures >= max_failures:
            break
    return trials, failures


def _run_cell(cell: _Cell, trials: int, max_failures, block: int, pool, window: int = 1) -> tuple[int, int]:
    blocks = _blocks(trials, block)
    if pool is None:
        return _consume((_run_block(cell, a, b) for a, b in blocks), blocks, max_failures)
    # keep a bounded window of blocks in flight; blocks past the stop point are wasted
    # work but never change the result because they are folded strictly in order
    pending = {}
    nxt = 0
    total_t = total_f = 0
    for idx, (a, b) in enumerate(blocks):
        while nxt < len(blocks) and nxt < idx + window:
            pending[nxt] = pool.submit(_run_block, cell, *blocks[nxt])
            nxt += 1
        f = pending.pop(idx).result()
        total_t += b - a
        total_f += f
        if max_failures is not None and total_f >= max_failures:
            break
    for fut in pending.values():
        fut.cancel()
    return total_t, total_f


def run_sweep(config: SweepConfig, *, write: bool = True) -> list[WerEstimate]:
    """Run every (code, p, T) cell of ``config``; results are independent of ``workers``."""
    codes = [load_code_file(c) for c in config.codes]
    label = config.decoder_label
    T_grid = config.rounds if config.noisy else (0,)
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    out: list[WerEstimate] = []
    try:
        for code in codes:
            for T in T_grid:
                for p in config.p_grid:
                    seed = cell_seed(config.seed, code.code_id, label, p, T)
                    cell = _Cell(str(code.path), code.sha256, config.sector, config.t_max, config.decoder,
                                 config.final_decoder, config.noisy, p, config.p_syndrome, T, seed)
                    trials, failures = _run_cell(cell, config.trials, config.max_failures, config.block_size, pool,
                                             4 * config.workers)
                    lo, hi = confidence_interval(failures, trials, CI_LEVEL)
                    est = WerEstimate(code.code_id, code.n_qubits, code.k, label, p, T, trials, failures,
                                      failures / trials, lo, hi, seed, _meta(config, code))
                    log.info("%s %s p=%g T=%d: %d/%d", code.code_id, label, p, T, failures, trials)
                    out.append(est)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    if write and config.out:
        write_results(out, config.out)
    return out


def _meta(config: SweepConfig, code: CodeFile) -> dict:
    return {
        "code_file": code.path.name,
        "code_sha256": code.sha256,
        "qubit_order": QUBIT_ORDER,
        "sector": config.sector,
        "mode": "noisy" if config.noisy else "ideal",
        "round_decoder": config.decoder if config.noisy else None,
        "final_decoder": config.final_decoder if config.noisy else config.decoder,
        "p_syndrome": config.p_syndrome,
        "t_max": config.t_max,
        "max_trials": config.trials,
        "max_failures": config.max_failures,
        "block_size": config.block_size,
        "master_seed": config.seed,
        "ci_level": CI_LEVEL,
        "ci_method": "wilson",
    }


# ---------------------------------------------------------------------------
# persistence


def _csv_text(rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def write_results(estimates: Sequence[WerEstimate], path: str | Path) -> None:
    """Append rows to a CSV file and its ``.json`` mirror, creating both if needed."""
    path = Path(path)
    header = f"# schema: {SCHEMA}\n" + _csv_text([CSV_COLUMNS])
    try:
        if path.exists():
            existing = path.read_text()
            if not existing.startswith(header):
                raise ConfigError(f"{path} exists with a different schema or header")
        else:
            path.write_text(header)
        with path.open("a") as fh:
            fh.write(_csv_text(e.row() for e in estimates))
        mirror = path.with_suffix(".json")
        if mirror.exists():
            doc = json.loads(mirror.read_text())
            if doc.get("schema") != SCHEMA:
                raise ConfigError(f"{mirror} has schema {doc.get('schema')!r}")
        else:
            doc = {"schema": SCHEMA, "threshold_method": THRESHOLD_METHOD, "records": []}
        for e in estimates:
            rec = {c: getattr(e, c) for c in CSV_COLUMNS}
            rec["meta"] = e.meta
            doc["records"].append(rec)
        mirror.write_text(json.dumps(doc, indent=1) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write results to {path}: {exc}") from exc


def read_results(path: str | Path) -> list[WerEstimate]:
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
    out = []
    for r in reader:
        out.append(WerEstimate(
            r["code_id"], int(r["n_qubits"]), int(r["k"]), r["decoder"], float(r["p"]), int(r["T"]),
            int(r["trials"]), int(r["failures"]), float(r["wer"]), float(r["ci_low"]), float(r["ci_high"]),
            int(r["seed"]),
        ))
    return out


# ---------------------------------------------------------------------------
# thresholds


def curves_from(estimates: Iterable[WerEstimate], T: int | None = None) -> dict[int, list[tuple[float, int, int]]]:
    """Group estimates into per-block-size curves of (p, failures, trials)."""
    curves: dict[int, list[tuple[float, int, int]]] = {}
    for e in estimates:
        if T is None or e.T == T:
            curves.setdefault(e.n_qubits, []).append((e.p, e.failures, e.trials))
    return curves


def threshold_table(estimates: Sequence[WerEstimate]) -> list[tuple[int, ThresholdBracket]]:
    """Threshold bracket per T, in increasing T."""
    table = []
    for T in sorted({e.T for e in estimates}):
        curves = curves_from(estimates, T)
        if len(curves) >= 2:
            table.append((T, estimate_threshold(curves)))
    return table


def sustainable_rate_scan(config: SweepConfig, estimates: Sequence[WerEstimate] | None = None) -> list[tuple[int, ThresholdBracket]]:
    """Per-T threshold brackets of a noisy campaign, for extrapolation in T."""
    if not config.noisy:
        raise ConfigError("a sustainable-rate scan needs a non-empty rounds grid")
    if len(config.codes) < 2:
        raise ConfigError("a threshold scan needs at least two codes")
    if estimates is None:
        estimates = run_sweep(config)
    return threshold_table(estimates)


# ---------------------------------------------------------------------------
# classical code selection


@dataclass(frozen=True)
class RankedCode:
    index: int
    graph: TannerGraph
    failures: int
    trials: int

    @property
    def block_error_rate(self) -> float:
        return self.failures / self.trials


def flip_block_errors(graph: TannerGraph, p: float, trials: int, seed: int) -> int:
    """Failures of the flip decoder on the zero codeword under BSC(p).

    Trial ``i`` uses the same stream for every graph, so comparisons between
    graphs of equal length share their noise.
    """
    failures = 0
    for i in range(trials):
        e = sample_error(graph.n, p, trial_rng(seed, i))
        failures += bool(flip_decode(graph, e).any())
    return failures


def rank_classical_codes(graphs: Sequence[TannerGraph], p: float, trials: int, seed: int = 0) -> list[RankedCode]:
    """Candidates sorted by flip block error rate, ties kept in input order."""
    if not graphs:
        return []
    shape = (graphs[0].n, graphs[0].m, graphs[0].delta_v, graphs[0].delta_c)
    for g in graphs:
        if (g.n, g.m, g.delta_v, g.delta_c) != shape:
            raise ConfigError("candidate graphs must share n, m and degrees")
    ranked = [RankedCode(i, g, flip_block_errors(g, p, trials, seed), trials) for i, g in enumerate(graphs)]
    return sorted(ranked, key=lambda r: r.failures)


def estimate_dict(e: WerEstimate) -> dict:
    d = asdict(e)
    d.pop("meta")
    return d


def bracket_dict(T: int, b: ThresholdBracket) -> dict:
    return {
        "T": T,
        "p_low": b.low,
        "p_high": None if math.isinf(b.high) else b.high,
        "estimate": b.estimate,
        "crossings": list(b.crossings),
        "method": THRESHOLD_METHOD,
    }


__all__ = [
    "CSV_COLUMNS", "SCHEMA", "CodeFile", "ConfigError", "RankedCode", "SweepConfig", "WerEstimate",
    "bracket_dict", "cell_seed", "curves_from", "estimate_dict", "flip_block_errors", "load_code_file",
    "rank_classical_codes", "read_results", "run_sweep", "sustainable_rate_scan", "threshold_table",
    "write_code_file", "write_results",
]
