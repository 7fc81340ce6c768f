"""Result serialization: sweep CSV, instance JSON, and SVG plots."""

from __future__ import annotations

import dataclasses
import json
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .metrics import Crossing, Indicators, InstanceResult, SweepResult, indicators

CSV_HEADER = (
    "density_ratio,r_u_mean,r_u_stderr,r_n_mean,r_n_stderr,"
    "r_c_mean,r_c_stderr,iterations_used,degenerate_count"
)

# gamma entries below this are dropped from the sparse triplet serialization
TRIPLET_MIN = 1e-12


@contextmanager
def _open_dest(destination, mode="w"):
    if hasattr(destination, "write"):
        yield destination
    else:
        with open(Path(destination), mode, encoding="utf-8") as handle:
            yield handle


def _fmt(x: float) -> str:
    """Full-precision decimal form; round-trips through float exactly."""
    return format(float(x), ".17g")


def emit_sweep_csv(result: SweepResult, destination) -> None:
    """Write one row per density ratio under the fixed header."""
    with _open_dest(destination) as out:
        out.write(CSV_HEADER + "\n")
        for i, ratio in enumerate(result.ratios):
            row = [
                _fmt(ratio),
                _fmt(result.r_u_mean[i]),
                _fmt(result.r_u_stderr[i]),
                _fmt(result.r_n_mean[i]),
                _fmt(result.r_n_stderr[i]),
                _fmt(result.r_c_mean[i]),
                _fmt(result.r_c_stderr[i]),
                str(int(result.iterations_used[i])),
                str(int(result.degenerate_count[i])),
            ]
            out.write(",".join(row) + "\n")


def load_sweep_csv(source) -> SweepResult:
    """Read a sweep CSV back into a SweepResult (crossing recomputed)."""
    from .metrics import find_crossing

    with _open_dest(source, mode="r") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise InvalidParameterError("not a sweep CSV: bad header")
    rows = [line.split(",") for line in lines[1:]]
    cols = list(zip(*rows)) if rows else [[] for _ in range(9)]
    result = SweepResult(
        ratios=np.array([float(v) for v in cols[0]]),
        r_u_mean=np.array([float(v) for v in cols[1]]),
        r_u_stderr=np.array([float(v) for v in cols[2]]),
        r_n_mean=np.array([float(v) for v in cols[3]]),
        r_n_stderr=np.array([float(v) for v in cols[4]]),
        r_c_mean=np.array([float(v) for v in cols[5]]),
        r_c_stderr=np.array([float(v) for v in cols[6]]),
        iterations_used=np.array([int(v) for v in cols[7]], dtype=int),
        degenerate_count=np.array([int(v) for v in cols[8]], dtype=int),
        error_count=np.zeros(len(rows), dtype=int),
        crossing=None,
    )
    return dataclasses.replace(result, crossing=find_crossing(result))


def _seed_repr(seed):
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        if isinstance(entropy, (int, np.integer)):
            return int(entropy)
        return list(map(int, entropy))
    return seed


def emit_instance_json(
    result: InstanceResult,
    destination,
    config=None,
    support_threshold: float = 1e-9,
) -> None:
    """Serialize one solved instance: geometry, demand, allocation, diagnostics.

    gamma is stored as sparse (station, user, value) triplets with entries
    below 1e-12 omitted; indicators are stored so a reload can verify them.
    """
    if result.degenerate or result.equilibrium is None:
        raise InvalidParameterError("cannot serialize a degenerate instance")
    eq = result.equilibrium
    inst = result.instance
    gamma = eq.gamma.gamma
    triplets = [
        [int(i), int(j), float(gamma[i, j])]
        for i, j in zip(*np.nonzero(gamma >= TRIPLET_MIN))
    ]
    ind = indicators(eq, inst, support_threshold)
    doc = {
        "seed": _seed_repr(result.seed),
        "config": config.as_dict() if config is not None else None,
        "n": inst.n,
        "m": inst.m,
        "n_total": inst.n_total,
        "stations": result.stations.points.tolist(),
        "users": result.users.points.tolist(),
        "demand": inst.demand.tolist(),
        "mu": inst.mu.tolist(),
        "nu": eq.nu.tolist(),
        "gamma_triplets": triplets,
        "objective": eq.objective,
        "transport_cost": eq.gamma.cost_value,
        "diagnostics": {
            "method": eq.diagnostics.method,
            "kkt_residual": eq.diagnostics.kkt_residual,
            "iterations": eq.diagnostics.iterations,
            "active_zero_count": eq.diagnostics.active_zero_count,
        },
        "indicators": {"r_u": ind.r_u, "r_n": ind.r_n, "r_c": ind.r_c},
        "support_threshold": support_threshold,
    }
    with _open_dest(destination) as out:
        json.dump(doc, out, indent=2)
        out.write("\n")


def recompute_indicators_from_json(doc: dict) -> Indicators:
    """Re-evaluate the indicators from a serialized instance document."""
    m = int(doc["m"])
    n = int(doc["n"])
    nu = np.asarray(doc["nu"], dtype=float)
    demand = np.asarray(doc["demand"], dtype=float)
    gamma = np.zeros((n, m))
    for i, j, v in doc["gamma_triplets"]:
        gamma[int(i), int(j)] = v
    thr = float(doc["support_threshold"])
    r_u = float(doc["n_total"] / m * (nu / demand).sum())
    r_n = float(nu.sum())
    serving = (gamma >= thr).sum(axis=0)
    r_c = float(np.mean(serving != 1))
    return Indicators(r_u=r_u, r_n=r_n, r_c=r_c)


def emit_plot(result: SweepResult, destination) -> None:
    """Self-contained SVG of the three indicator curves vs. density ratio.

    The crossing, when present, is drawn as a marker element with
    gid 'crossing-marker'. Text is kept as SVG text (not paths).
    """
    if len(result.ratios) < 2:
        raise InvalidParameterError("plot needs at least 2 ratios")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.errorbar(result.ratios, result.r_u_mean, yerr=result.r_u_stderr,
                    label="user satisfaction r_u", marker="o", ms=3, capsize=2)
        ax.errorbar(result.ratios, result.r_n_mean, yerr=result.r_n_stderr,
                    label="network load r_n", marker="s", ms=3, capsize=2)
        ax.errorbar(result.ratios, result.r_c_mean, yerr=result.r_c_stderr,
                    label="cooperation r_c", marker="^", ms=3, capsize=2)
        if result.crossing is not None:
            ax.plot(
                [result.crossing.ratio],
                [result.crossing.level],
                marker="*",
                ms=14,
                color="black",
                linestyle="none",
                gid="crossing-marker",
                label=f"working point ({result.crossing.ratio:.1f}, {result.crossing.level:.2f})",
            )
        ax.set_xlabel("density ratio")
        ax.set_ylabel("indicator")
        ax.set_ylim(-0.02, 1.02)
        ax.set_yticks(np.linspace(0.0, 1.0, 6))
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        with _open_dest(destination) as out:
            fig.savefig(out, format="svg")
        plt.close(fig)
