"""All file emission: CSV snapshot/audit/sweep mirrors and JSON reports.

Every float is printed with 17 significant digits so files round-trip
bit-exactly; every file starts with a header row or carries a schema_version
key. Identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import os

__all__ = [
    "fmt",
    "write_field_snapshots",
    "write_density_snapshots",
    "write_audit",
    "write_reconstruction",
    "write_sweep_json",
    "write_sweep_csv",
    "write_witnesses",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_field_snapshots(path, snapshots, centers) -> None:
    """Schema: t,x,rho_1..rho_n,m_1..m_n; one row per cell per snapshot."""
    n = snapshots[0].n
    header = ["t", "x"] + [f"rho_{i + 1}" for i in range(n)] + [f"m_{i + 1}" for i in range(n)]

    def rows():
        for snap in snapshots:
            for c, x in enumerate(centers):
                yield [snap.t, x, *snap.r[:, c], *snap.m[:, c]]

    _write_rows(path, header, rows())


def write_density_snapshots(path, snapshots, centers) -> None:
    """Schema: t,x,rho_1..rho_n."""
    n = snapshots[0].r.shape[0]
    header = ["t", "x"] + [f"rho_{i + 1}" for i in range(n)]

    def rows():
        for snap in snapshots:
            for c, x in enumerate(centers):
                yield [snap.t, x, *snap.r[:, c]]

    _write_rows(path, header, rows())


def write_reconstruction(path, t, centers, mbar, ebar) -> None:
    """Schema: t,x,mbar_1..mbar_n,ebar_1..ebar_n."""
    n = mbar.shape[0]
    header = (
        ["t", "x"]
        + [f"mbar_{i + 1}" for i in range(n)]
        + [f"ebar_{i + 1}" for i in range(n)]
    )
    rows = ([t, x, *mbar[:, c], *ebar[:, c]] for c, x in enumerate(centers))
    _write_rows(path, header, rows)


def write_audit(path, audit) -> None:
    """Schema: step,t,total_entropy,dissipation,residual."""
    arrays = audit.arrays()
    header = ["step", "t", "total_entropy", "dissipation", "residual"]
    rows = zip(
        arrays["step"],
        arrays["t"],
        arrays["total_entropy"],
        arrays["dissipation"],
        arrays["residual"],
    )
    _write_rows(path, header, rows)


def write_witnesses(path, witnesses) -> None:
    """Schema: t,x,species,value (1-based species index)."""
    header = ["t", "x", "species", "value"]
    rows = ([w.t, w.x, w.species + 1, w.value] for w in witnesses)
    _write_rows(path, header, rows)


def _record_dict(rec) -> dict:
    out = {
        "epsilon": rec.epsilon,
        "t": rec.times.tolist(),
        "phi": rec.phi.tolist(),
        "R1": rec.r1.tolist(),
        "R2": rec.r2.tolist(),
        "Q": rec.q.tolist(),
        "E": rec.e.tolist(),
        "K1": rec.k1.tolist(),
        "K2": rec.k2.tolist(),
        "l2_gap": rec.l2_gap.tolist(),
        "phi0": rec.phi0,
        "K_bound": rec.k_bound,
        "failure": rec.failure,
    }
    out.update(rec.time_integrals())
    return out


def write_sweep_json(path, result) -> None:
    doc = {
        "schema_version": 1,
        "observed_order": result.observed_order,
        "K_estimate": result.k_estimate,
        "K_per_epsilon": result.k_per_epsilon.tolist(),
        "coupling_check": {
            "ratios": result.coupling_ratios.tolist(),
            "satisfied": result.coupling_ok,
            "warnings": result.warnings,
        },
        "records": [_record_dict(rec) for rec in result.records],
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_sweep_csv(path, result) -> None:
    """Plottable mirror: epsilon,t,phi,R1,R2,Q,E,K1,K2,l2_gap."""
    header = ["epsilon", "t", "phi", "R1", "R2", "Q", "E", "K1", "K2", "l2_gap"]

    def rows():
        for rec in result.records:
            for j in range(rec.times.size):
                yield [
                    rec.epsilon,
                    rec.times[j],
                    rec.phi[j],
                    rec.r1[j],
                    rec.r2[j],
                    rec.q[j],
                    rec.e[j],
                    rec.k1[j],
                    rec.k2[j],
                    rec.l2_gap[j],
                ]

    _write_rows(path, header, rows())

