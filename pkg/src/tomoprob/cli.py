"""Command-line front door.

Four commands: ``marginal`` (forward tomography map), ``reconstruct``
(inverse map with an invariant report), ``evolve`` (marginal dynamics with
optional closed-form validation), and ``verify`` (invariant suites).  Every
run takes one structured JSON config, writes plot-ready CSV grids plus a
``manifest.json`` listing each output with a content checksum, and exits 0
on success, 1 on an invariant failure, and 2 on a usage or parse error.

Output files are deterministic: the same config always produces
byte-identical grids (the manifest carries the wall time and is the one
file excluded from that guarantee).
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import verify as verify_mod
from .pauli_evolution import (
    EvolutionProblem,
    HamiltonianSpec,
    HybridFrame,
    HybridMarginal,
    analytic_landau_solution,
    analytic_trapped_solution,
    circle_lattice,
    circle_marginal_from_density,
    evolve,
    landau_initial_marginal,
    sphere_marginal_from_density,
    trapped_initial_marginal,
)
from .qstate import (
    DensityMatrix,
    density_from_pure,
    load_state,
    save_state,
    state_from_dict,
)
from .specfun import HalfInt
from .spintomo import (
    EulerFrame,
    sphere_lattice,
    spin_marginal_grid,
    read_spin_csv,
    reconstruct_spin_density,
    write_spin_csv,
)
from .symtomo import (
    SymplecticFrame,
    default_circle_frames,
    marginal_grid,
    read_marginal_csv,
    reconstruct_density,
    write_marginal_csv,
)

UP, DOWN = HalfInt(1), HalfInt(-1)

_PROFILE_TOLS = {
    "default": {
        "marginal_normalization": 1e-6,
        "spin_sum_rule": 1e-10,
        "reconstruction_hermiticity": 1e-2,
        "reconstruction_density": 1e-4,
        "conservation": 1e-5,
    },
    "strict": {
        "marginal_normalization": 1e-8,
        "spin_sum_rule": 1e-12,
        "reconstruction_hermiticity": 1e-3,
        "reconstruction_density": 1e-5,
        "conservation": 1e-7,
    },
}


# ---------------------------------------------------------------------------
# plumbing

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _fail_invariant(message: str):
    click.echo(f"invariant failure: {message}", err=True)
    sys.exit(1)


def _load_config(path: str) -> tuple[dict, Path, str]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise click.UsageError(f"cannot read config {path}: {e}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise click.UsageError(f"{path}: line {e.lineno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise click.UsageError(f"{path}: config must be a JSON object")
    return cfg, p.parent, hashlib.sha256(text.encode()).hexdigest()


def _require(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise click.UsageError(f"{where} is missing required key {key!r}")
    return cfg[key]


def _load_state_spec(spec, base: Path) -> DensityMatrix:
    if not isinstance(spec, dict):
        raise click.UsageError("'state' must be an object (inline state or {'file': path})")
    try:
        if "file" in spec:
            state = load_state(base / spec["file"])
        else:
            state = state_from_dict(spec)
    except (OSError, KeyError, ValueError, TypeError) as e:
        raise click.UsageError(f"cannot load state: {e}") from None
    if not isinstance(state, DensityMatrix):
        state = density_from_pure(state)
    return state


def _axis_grid(spec, name: str) -> np.ndarray:
    if not isinstance(spec, dict) or not {"min", "max", "points"} <= spec.keys():
        raise click.UsageError(f"'{name}' needs keys min, max, points")
    n = int(spec["points"])
    if n < 2:
        raise click.UsageError(f"'{name}' needs at least 2 points")
    return np.linspace(float(spec["min"]), float(spec["max"]), n)


def _symplectic_frames(spec) -> tuple:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise click.UsageError("'frames' needs a 'kind'")
    kind = spec["kind"]
    if kind == "circle":
        return default_circle_frames(int(spec.get("count", 64)))
    if kind == "list":
        values = spec.get("values", [])
        frames = tuple(SymplecticFrame(float(m), float(n)) for m, n in values)
        if not frames:
            raise click.UsageError("frame lattice is empty")
        return frames
    raise click.UsageError(f"unknown symplectic frame kind {kind!r}")


def _euler_frames(spec) -> tuple[tuple, np.ndarray | None]:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise click.UsageError("'frames' needs a 'kind'")
    kind = spec["kind"]
    if kind == "sphere":
        return sphere_lattice(int(spec.get("n_alpha", 8)), int(spec.get("n_beta", 8)))
    if kind == "beta_sweep":
        count = int(spec.get("count", 32))
        if count < 1:
            raise click.UsageError("frame lattice is empty")
        alpha = float(spec.get("alpha", 0.0))
        betas = np.linspace(0.0, math.pi, count)
        return tuple(EulerFrame(alpha, float(b)) for b in betas), None
    if kind == "list":
        values = spec.get("values", [])
        frames = tuple(EulerFrame(*(float(v) for v in row)) for row in values)
        if not frames:
            raise click.UsageError("frame lattice is empty")
        return frames, None
    raise click.UsageError(f"unknown spin frame kind {kind!r}")


class RunManifest:
    """Record of one command run: config digest, grids, checks, outputs."""

    def __init__(self, command: str, config_digest: str | None, threads: int,
                 profile: str):
        self._t0 = time.perf_counter()
        self.data = {
            "command": command,
            "config_digest": config_digest,
            "threads": threads,
            "tolerance_profile": profile,
            "grid_specs": {},
            "tolerances": {},
            "conservation": {},
            "outputs": [],
        }

    def add_output(self, path: Path):
        self.data["outputs"].append({
            "file": path.name,
            "sha256": _sha256(path),
            "bytes": path.stat().st_size,
        })

    def write(self, out_dir: Path):
        self.data["wall_time_s"] = round(time.perf_counter() - self._t0, 3)
        target = out_dir / "manifest.json"
        with open(target, "w") as fh:
            json.dump(self.data, fh, indent=1, sort_keys=True, default=_json_default)
            fh.write("\n")
        return target


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _out_dir(out: str) -> Path:
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# evolution snapshot files

def write_snapshot_csv(path, snap: HybridMarginal, extra: dict | None = None):
    """Plot-ready CSV for one evolution snapshot.

    Circle and sphere lattices are written in full.  Two-mode rectangular
    lattices would need one row per point of a four-axis frame grid, so only
    the central-frame slice is emitted; the header records the fixed labels.
    """
    header = {"kind": snap.kind, "time": float(snap.time)}
    if extra:
        header.update(extra)
    rows: list[str] = []
    if snap.kind == "circle" and snap.has_spin:
        header.update(n_phi=len(snap.phis), n_y=len(snap.y),
                      n_sphere=len(snap.sphere_frames))
        cols = "s,alpha,beta,phi,y,w"
        svals = (0.5, -0.5)
        for si, s in enumerate(svals):
            for k, fr in enumerate(snap.sphere_frames):
                for i, phi in enumerate(snap.phis):
                    for iy, yv in enumerate(snap.y):
                        rows.append(f"{s!r},{fr.alpha!r},{fr.beta!r},{float(phi)!r},"
                                    f"{float(yv)!r},{float(snap.values[si, k, i, iy])!r}")
    elif snap.kind == "circle":
        header.update(n_phi=len(snap.phis), n_y=len(snap.y))
        cols = "phi,y,w"
        for i, phi in enumerate(snap.phis):
            for iy, yv in enumerate(snap.y):
                rows.append(f"{float(phi)!r},{float(yv)!r},{float(snap.values[i, iy])!r}")
    elif snap.kind == "sphere":
        header.update(n_sphere=len(snap.sphere_frames), j=float(snap.spin))
        cols = "s,alpha,beta,weight,w"
        svals = [(snap.spin.twice - 2 * i) / 2.0 for i in range(snap.spin.twice + 1)]
        for si, s in enumerate(svals):
            for k, fr in enumerate(snap.sphere_frames):
                wt = float(snap.sphere_weights[k])
                rows.append(f"{s!r},{fr.alpha!r},{fr.beta!r},{wt!r},"
                            f"{float(snap.values[si, k])!r}")
    elif snap.kind == "rect" and snap.modes == 2 and snap.has_spin:
        mids = tuple(g.size // 2 for g in snap.frame_grids)
        header.update(
            n_sphere=len(snap.sphere_frames),
            n_x1=snap.x[0].size, n_x2=snap.x[1].size,
            slice_labels={name: float(g[m]) for name, g, m in
                          zip(("mu1", "nu1", "mu2", "nu2"), snap.frame_grids, mids)},
        )
        cols = "s,alpha,beta,x1,x2,w"
        block = snap.values[:, :, :, :, mids[0], mids[1], mids[2], mids[3]]
        for si, s in enumerate((0.5, -0.5)):
            for k, fr in enumerate(snap.sphere_frames):
                for i1, x1v in enumerate(snap.x[0]):
                    for i2, x2v in enumerate(snap.x[1]):
                        rows.append(f"{s!r},{fr.alpha!r},{fr.beta!r},{float(x1v)!r},"
                                    f"{float(x2v)!r},{float(block[si, k, i1, i2])!r}")
    else:
        raise ValueError(f"no snapshot writer for kind {snap.kind!r}")
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(cols + "\n")
        fh.write("\n".join(rows) + "\n")


def read_snapshot_csv(path) -> dict:
    """Re-parse a snapshot CSV into header metadata plus named columns."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: line 1: missing JSON header")
        try:
            meta = json.loads(first[1:].strip())
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: line 1: bad header: {e}") from None
        names = fh.readline().strip().split(",")
        columns: list[list[float]] = [[] for _ in names]
        for ln, line in enumerate(fh, start=3):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValueError(f"{path}: line {ln}: expected {len(names)} fields")
            try:
                for col, part in zip(columns, parts):
                    col.append(float(part))
            except ValueError:
                raise ValueError(f"{path}: line {ln}: non-numeric field") from None
    out = dict(meta)
    out["columns"] = {name: np.array(col) for name, col in zip(names, columns)}
    return out


# ---------------------------------------------------------------------------
# commands

@click.group()
def main():
    """Tomographic-probability toolkit: marginals, reconstruction, dynamics."""


_config_opt = click.option("--config", "config_path", required=True,
                           type=click.Path(), help="JSON run configuration.")
_out_opt = click.option("--out", "out", default="runs", show_default=True,
                        help="Output directory (created if absent).")
_threads_opt = click.option("--threads", default=1, show_default=True,
                            type=click.IntRange(min=1),
                            help="Worker threads for frame batches.")
_profile_opt = click.option("--tolerance-profile", "profile",
                            type=click.Choice(["strict", "default"]),
                            default="default", show_default=True)


@main.command()
@_config_opt
@_out_opt
@_threads_opt
@_profile_opt
def marginal(config_path, out, threads, profile):
    """Compute a marginal grid for a state over a frame lattice."""
    cfg, base, digest = _load_config(config_path)
    tols = _PROFILE_TOLS[profile]
    manifest = RunManifest("marginal", digest, threads, profile)
    scheme = _require(cfg, "scheme")
    state = _load_state_spec(_require(cfg, "state"), base)
    out_dir = _out_dir(out)
    target = out_dir / "marginal.csv"

    if scheme == "symplectic":
        x = _axis_grid(_require(cfg, "x"), "x")
        frames = _symplectic_frames(_require(cfg, "frames"))
        try:
            qm = marginal_grid(state, x, frames, threads=threads)
        except ValueError as e:
            raise click.UsageError(str(e)) from None
        qm.meta.update(levels=state.dim, scheme="symplectic")
        write_marginal_csv(target, qm)
        defect = float(np.max(np.abs(qm.normalization_defects())))
        manifest.data["grid_specs"] = {"x": cfg["x"], "frames": cfg["frames"]}
        manifest.data["conservation"] = {
            "normalization_max_defect": defect,
            "min_value": qm.min_value(),
        }
        manifest.data["tolerances"] = {"normalization": tols["marginal_normalization"]}
        manifest.add_output(target)
        manifest.write(out_dir)
        click.echo(f"wrote {target} ({len(frames)} frames x {x.size} points, "
                   f"normalization defect {defect:.3e})")
        if defect > tols["marginal_normalization"]:
            _fail_invariant(f"normalization defect {defect:.3e} exceeds "
                            f"{tols['marginal_normalization']:.1e}")
    elif scheme == "spin":
        if state.basis.kind != "spin":
            raise click.UsageError("spin scheme needs a spin-basis state")
        frames, weights = _euler_frames(_require(cfg, "frames"))
        sm = spin_marginal_grid(state, frames, weights)
        sm.meta.update(scheme="spin")
        write_spin_csv(target, sm)
        defect = float(np.max(np.abs(sm.sum_rule_defects())))
        manifest.data["grid_specs"] = {"frames": cfg["frames"]}
        manifest.data["conservation"] = {
            "sum_rule_max_defect": defect,
            "min_value": float(sm.values.min()),
        }
        manifest.data["tolerances"] = {"sum_rule": tols["spin_sum_rule"]}
        manifest.add_output(target)
        manifest.write(out_dir)
        click.echo(f"wrote {target} ({len(frames)} frames, "
                   f"sum-rule defect {defect:.3e})")
        if defect > tols["spin_sum_rule"]:
            _fail_invariant(f"sum-rule defect {defect:.3e} exceeds "
                            f"{tols['spin_sum_rule']:.1e}")
    else:
        raise click.UsageError(f"unknown scheme {scheme!r}")


@main.command()
@_config_opt
@_out_opt
@_threads_opt
@_profile_opt
def reconstruct(config_path, out, threads, profile):
    """Reconstruct a density matrix from a marginal grid file."""
    cfg, base, digest = _load_config(config_path)
    tols = _PROFILE_TOLS[profile]
    manifest = RunManifest("reconstruct", digest, threads, profile)
    scheme = _require(cfg, "scheme")
    marg_path = base / _require(cfg, "marginal")
    out_dir = _out_dir(out)
    target = out_dir / "density.json"
    report: dict = {}

    if scheme == "symplectic":
        try:
            qm = read_marginal_csv(marg_path)
        except (OSError, ValueError) as e:
            raise click.UsageError(str(e)) from None
        levels = int(cfg["levels"]) if "levels" in cfg else None
        try:
            rho = reconstruct_density(
                qm, levels=levels, report=report,
                max_hermiticity_defect=tols["reconstruction_hermiticity"],
                tol=tols["reconstruction_density"])
        except ValueError as e:
            msg = str(e)
            if "lattice" in msg and "Hermiticity" not in msg:
                raise click.UsageError(msg) from None
            _fail_invariant(msg)
    elif scheme == "spin":
        try:
            sm = read_spin_csv(marg_path)
        except (OSError, ValueError, KeyError) as e:
            raise click.UsageError(str(e)) from None
        try:
            rho = reconstruct_spin_density(sm, report=report,
                                           tol=tols["reconstruction_density"])
        except ValueError as e:
            msg = str(e)
            if "weights" in msg:
                raise click.UsageError(msg) from None
            _fail_invariant(msg)
    else:
        raise click.UsageError(f"unknown scheme {scheme!r}")

    save_state(rho, target)
    eigs = np.linalg.eigvalsh(rho.entries)
    report["min_eigenvalue"] = float(eigs.min())
    report["trace_defect"] = abs(complex(report.get("trace", np.trace(rho.entries))) - 1.0)
    manifest.data["grid_specs"] = {"marginal": str(cfg["marginal"]), "dim": rho.dim}
    manifest.data["conservation"] = {
        "hermiticity_defect": report.get("hermiticity_defect"),
        "trace_defect": report["trace_defect"],
        "min_eigenvalue": report["min_eigenvalue"],
    }
    manifest.data["tolerances"] = {
        "hermiticity": tols["reconstruction_hermiticity"],
        "density_validation": tols["reconstruction_density"],
    }
    manifest.add_output(target)
    manifest.write(out_dir)
    click.echo(f"wrote {target} (dim {rho.dim}, hermiticity defect "
               f"{report.get('hermiticity_defect', 0.0):.3e}, "
               f"min eigenvalue {report['min_eigenvalue']:.3e})")


def _build_initial(cfg, base, lattice) -> HybridMarginal:
    kind = lattice.get("kind")
    initial = cfg.get("initial", "state")
    if kind == "circle":
        n_phi = int(lattice.get("n_phi", 16))
        phis, y = circle_lattice(n_phi, int(lattice.get("n_y", 64)),
                                 float(lattice.get("y_span", 8.0)))
        sphere = None
        if "sphere" in lattice:
            na, nb = lattice["sphere"]
            sphere = sphere_lattice(int(na), int(nb))
        if initial == "trapped_superposition":
            return trapped_initial_marginal(n_phi, y, sphere)
        if initial == "state":
            state = _load_state_spec(_require(cfg, "state"), base)
            return circle_marginal_from_density(state, n_phi, y, sphere)
        raise click.UsageError(f"unknown initial {initial!r} for circle lattice")
    if kind == "sphere":
        na, nb = lattice.get("shape", (8, 8))
        sphere = sphere_lattice(int(na), int(nb))
        state = _load_state_spec(_require(cfg, "state"), base)
        return sphere_marginal_from_density(state, sphere)
    if kind == "rect":
        x1 = _axis_grid(_require(lattice, "x1", "lattice"), "x1")
        x2 = _axis_grid(_require(lattice, "x2", "lattice"), "x2")
        fg = _axis_grid(_require(lattice, "frame_axis", "lattice"), "frame_axis")
        sphere = None
        if "sphere" in lattice:
            na, nb = lattice["sphere"]
            sphere = sphere_lattice(int(na), int(nb))
        if initial == "landau_superposition":
            return landau_initial_marginal(x1, x2, tuple(fg for _ in range(4)),
                                           sphere=sphere)
        raise click.UsageError(f"unknown initial {initial!r} for rect lattice")
    raise click.UsageError(f"unknown lattice kind {kind!r}")


def _validation_reference(kind, snap, cfg, base):
    if kind == "trapped_closed_form":
        ref = np.empty_like(snap.values)
        for i, phi in enumerate(snap.phis):
            sym = (SymplecticFrame(math.cos(phi), math.sin(phi)),)
            for k, e in enumerate(snap.sphere_frames):
                hf = HybridFrame(sym, e)
                for si, s in enumerate((UP, DOWN)):
                    ref[si, k, i] = analytic_trapped_solution(snap.y, hf, s, snap.time)
        return snap.values, ref
    if kind == "landau_closed_form":
        mids = tuple(g.size // 2 for g in snap.frame_grids)
        sym = (SymplecticFrame(snap.frame_grids[0][mids[0]], snap.frame_grids[1][mids[1]]),
               SymplecticFrame(snap.frame_grids[2][mids[2]], snap.frame_grids[3][mids[3]]))
        block = snap.values[:, :, :, :, mids[0], mids[1], mids[2], mids[3]]
        ref = np.empty_like(block)
        x1, x2 = snap.x
        for k, e in enumerate(snap.sphere_frames):
            hf = HybridFrame(sym, e)
            for si, s in enumerate((UP, DOWN)):
                ref[si, k] = analytic_landau_solution(
                    x1[:, None], x2[None, :], hf, s, snap.time)
        return block, ref
    if kind == "free_transport":
        # exact label transport of the ground-state Gaussian
        r2t = (np.cos(snap.phis) ** 2
               + (np.sin(snap.phis) + snap.time * np.cos(snap.phis)) ** 2)
        ref = np.exp(-(snap.y[None, :] ** 2) / r2t[:, None]) / np.sqrt(
            math.pi * r2t[:, None])
        return snap.values, ref
    if kind == "spin_phase":
        # two-level diagonal Hamiltonian: the coherence rotates at the
        # level-gap rate while populations stay fixed
        ham = cfg["hamiltonian"]
        gap = float(ham["a"]) - float(ham["c"])
        state = _load_state_spec(cfg["state"], base)
        ent = np.array(state.entries)
        ent[0, 1] *= np.exp(-1j * gap * snap.time)
        ent[1, 0] = np.conj(ent[0, 1])
        rho_t = DensityMatrix(state.basis, ent)
        sm = spin_marginal_grid(rho_t, snap.sphere_frames, snap.sphere_weights)
        return snap.values, sm.values.T
    raise click.UsageError(f"unknown validation kind {kind!r}")


@main.command("evolve")
@_config_opt
@_out_opt
@_threads_opt
@_profile_opt
def evolve_cmd(config_path, out, threads, profile):
    """Evolve a marginal in time and write snapshot grids."""
    cfg, base, digest = _load_config(config_path)
    tols = _PROFILE_TOLS[profile]
    manifest = RunManifest("evolve", digest, threads, profile)
    ham_spec = _require(cfg, "hamiltonian")
    if not isinstance(ham_spec, dict) or "kind" not in ham_spec:
        raise click.UsageError("'hamiltonian' needs a 'kind'")
    params = {k: v for k, v in ham_spec.items() if k != "kind"}
    try:
        ham = HamiltonianSpec(ham_spec["kind"], params)
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    lattice = _require(cfg, "lattice")
    init = _build_initial(cfg, base, lattice)
    times = cfg.get("times")
    if not isinstance(times, list) or not times:
        raise click.UsageError("'times' must be a non-empty list")
    # a config may relax the conservation gate for deliberately coarse
    # frame boxes (edge stencils dominate the integrated norm there)
    norm_tol = float(cfg.get("norm_tolerance", tols["conservation"]))
    problem = EvolutionProblem(
        ham, init, tuple(float(t) for t in times),
        dt=float(cfg["dt"]) if cfg.get("dt") else None,
        norm_tolerance=norm_tol,
        full_lattice=bool(cfg.get("full_lattice", False)),
    )
    try:
        result = evolve(problem)
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    except RuntimeError as e:
        _fail_invariant(str(e))

    out_dir = _out_dir(out)
    written = []
    for idx, snap in enumerate(result.snapshots):
        target = out_dir / f"snapshot_{idx:02d}.csv"
        write_snapshot_csv(target, snap, extra={"hamiltonian": ham_spec["kind"]})
        manifest.add_output(target)
        written.append(target)

    validation = cfg.get("validate")
    val_errors = []
    if validation:
        vkind = _require(validation, "kind", "'validate'")
        vtol = float(validation.get("tolerance", 1e-3))
        for snap in result.snapshots:
            got, ref = _validation_reference(vkind, snap, cfg, base)
            val_errors.append(float(np.max(np.abs(got - ref))))
        manifest.data["tolerances"]["validation"] = vtol
        manifest.data["conservation"]["validation_errors"] = val_errors

    manifest.data["grid_specs"] = {"lattice": lattice, "times": times}
    manifest.data["tolerances"]["conservation"] = norm_tol
    manifest.data["conservation"].update(
        norm_drift=result.norm_drift,
        min_value=min(s.min_value() for s in result.snapshots),
        dt=result.dt, steps=result.steps,
    )
    manifest.write(out_dir)
    click.echo(f"wrote {len(written)} snapshots to {out_dir} "
               f"(dt {result.dt:.4g}, {result.steps} steps, "
               f"norm drift {result.norm_drift:.3e})")
    if result.norm_drift > norm_tol:
        _fail_invariant(f"normalization drift {result.norm_drift:.3e} exceeds "
                        f"{norm_tol:.1e}")
    if validation:
        worst = max(val_errors)
        click.echo(f"validation ({validation['kind']}): max error {worst:.3e}")
        if worst > vtol:
            _fail_invariant(f"validation error {worst:.3e} exceeds {vtol:.1e}")


@main.command()
@click.argument("suite", required=False, default="all")
@click.option("--out", "out", default=None,
              help="Also write verify_report.json and a manifest here.")
@_threads_opt
@_profile_opt
def verify(suite, out, threads, profile):
    """Run an invariant suite: specfun, symtomo, spintomo, evolution, landau, all."""
    if suite not in verify_mod.SUITE_NAMES + ("all",):
        raise click.UsageError(
            f"unknown suite {suite!r}; expected one of "
            f"{', '.join(verify_mod.SUITE_NAMES + ('all',))}")
    results = verify_mod.run_suite(suite, profile)
    for r in results:
        click.echo(f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}/{r.name}: "
                   f"{r.value:.3e} (tol {r.tolerance:g})")
    n_pass = sum(1 for r in results if r.passed)
    click.echo(f"{n_pass}/{len(results)} checks passed")
    if out is not None:
        out_dir = _out_dir(out)
        manifest = RunManifest("verify", None, threads, profile)
        target = out_dir / "verify_report.json"
        with open(target, "w") as fh:
            json.dump({"suite": suite, "profile": profile,
                       "passed": n_pass == len(results),
                       "checks": [r.as_dict() for r in results]},
                      fh, indent=1, sort_keys=True)
            fh.write("\n")
        manifest.data["grid_specs"] = {"suite": suite}
        manifest.data["conservation"] = {"checks": len(results), "passed": n_pass}
        manifest.add_output(target)
        manifest.write(out_dir)
    if n_pass != len(results):
        sys.exit(1)


if __name__ == "__main__":
    main()
