"""CSV, legacy VTK and PNG writers for run outputs."""
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..splines import basis_matrix

ENERGY_HEADER = ("step", "time", "kinetic", "potential", "total")


@dataclass(frozen=True)
class EnergyRecord:
    step: int
    time: float
    kinetic: float
    potential: float
    total: float

    @classmethod
    def from_parts(cls, step, time, kinetic, potential):
        return cls(int(step), float(time), float(kinetic), float(potential),
                   float(kinetic) + float(potential))


def fmt(v):
    """17 significant digits, enough to round-trip a double."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """(header, float array) of a CSV written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r] for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, len(rows[0])))
    return rows[0], data


def write_energy_csv(path, records):
    return write_csv(path, ENERGY_HEADER,
                     [(r.step, r.time, r.kinetic, r.potential, r.total) for r in records])


def sample_field(spaces, coeffs, per_element=4):
    """Evaluate a spline field on a uniform grid of n_el * per_element points per direction."""
    grids, pts = [], []
    for s in spaces:
        x = np.linspace(0.0, 1.0, s.n_el * per_element)
        pts.append(x)
        grids.append(basis_matrix(s, x, 0))
    vals = np.asarray(coeffs, dtype=float)
    for axis, B in enumerate(grids):
        vals = np.moveaxis(np.tensordot(B, vals, axes=([1], [axis])), 0, axis)
    return pts, vals


def write_vtk(path, spaces, fields, per_element=4, title="igawave snapshot"):
    """Legacy ASCII STRUCTURED_POINTS file.

    ``fields`` maps a name to a coefficient tensor (scalar data) or to a
    sequence of component tensors (vector data, padded to three components).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dims = [s.n_el * per_element for s in spaces]
    full = dims + [1] * (3 - len(dims))
    spacing = [1.0 / (d - 1) for d in dims] + [1.0] * (3 - len(dims))
    npts = int(np.prod(full))
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_POINTS",
             "DIMENSIONS {} {} {}".format(*full), "ORIGIN 0 0 0",
             "SPACING {} {} {}".format(*(fmt(h) for h in spacing)), f"POINT_DATA {npts}"]
    for name, data in fields.items():
        if isinstance(data, np.ndarray) and data.ndim == len(spaces):
            _, v = sample_field(spaces, data, per_element)
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [fmt(x) for x in v.ravel(order="F")]
        else:
            comps = [sample_field(spaces, c, per_element)[1].ravel(order="F") for c in data]
            comps += [np.zeros(npts)] * (3 - len(comps))
            lines.append(f"VECTORS {name} double")
            lines += [" ".join(fmt(c[i]) for c in comps) for i in range(npts)]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def read_vtk_points(path):
    """(dimensions, number of points) from the header of a legacy VTK file."""
    dims, npts = None, None
    with open(path, encoding="ascii") as fh:
        for line in fh:
            if line.startswith("DIMENSIONS"):
                dims = tuple(int(t) for t in line.split()[1:])
            elif line.startswith("POINT_DATA"):
                npts = int(line.split()[1])
                break
    return dims, npts


# -- figures ----------------------------------------------------------------

def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_energy(path, records, title="Energy"):
    plt = _pyplot()
    t = [r.time for r in records]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, [r.kinetic for r in records], label="kinetic")
    ax.plot(t, [r.potential for r in records], label="potential")
    ax.plot(t, [r.total for r in records], "k", lw=2, label="total")
    ax.set_xlabel("time")
    ax.set_ylabel("energy")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_series(path, x, ys, xlabel, ylabel, title="", loglog=False, marker="o"):
    """Line plot of one or several named series sharing an x axis."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, marker=marker, label=label)
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(ys) > 1:
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_field(path, spaces, coeffs, title=""):
    """Colour map of a 2D field (or the mid-plane z slice of a 3D one)."""
    plt = _pyplot()
    pts, v = sample_field(spaces, coeffs)
    if v.ndim == 3:
        v = v[:, :, v.shape[2] // 2]
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.pcolormesh(pts[0], pts[1], v.T, shading="auto", cmap="RdBu_r")
    fig.colorbar(im, ax=ax)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
