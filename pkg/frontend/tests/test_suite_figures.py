"""End-to-end: every suite CSV renders to an image without error.

Small suite configurations are produced through the computation package's
public entry points, then each figure kind is rendered from the real files.
The convergence series must equal the CSV values exactly.
"""

import pytest

import render

chaosgrad = pytest.importorskip("chaosgrad")

from chaosgrad.experiments import (read_records, suite_contour,  # noqa: E402
                                   suite_converge_a, suite_converge_w,
                                   suite_logistic_demo, suite_noise,
                                   suite_sweep_gamma, write_records,
                                   write_sidecar)


@pytest.fixture(scope="module")
def suite_dir(tmp_path_factory):
    """Generate small but real suite outputs once for all render checks."""
    root = tmp_path_factory.mktemp("suites")

    def emit(name, records):
        path = root / f"{name}.csv"
        write_records(path, records)
        write_sidecar(path.with_suffix(".json"), {"suite": name})
        return path

    emit("converge-A", suite_converge_a(seed=0, repeats=4, grid=(50, 100)))
    emit("converge-W", suite_converge_w(seed=0, repeats=4, grid=(2, 6), segments=50))
    emit("sweep-solenoid", suite_sweep_gamma(system="solenoid21", seed=0,
                                             gammas=(0.08, 0.12), segments=50))
    emit("sweep-tent", suite_sweep_gamma(system="tent", seed=0, repeats=2,
                                         gammas=(0.05, 0.1), frequencies=(1, 8),
                                         segments=50))
    emit("contour", suite_contour(seed=0, repeats=3, values=(0.08, 0.12),
                                  segments=50, rho_segments=100))
    emit("noise", suite_noise(seed=0, repeats=2, gammas=(0.1,), segments=100,
                              dump_prefix=str(root / "noise")))
    records, _ = suite_logistic_demo(seed=0, repeats=3, grid=(25, 50))
    emit("logistic-demo", records)
    return root


@pytest.mark.parametrize("name,kind", [
    ("converge-A", "converge-A"),
    ("converge-W", "converge-W"),
    ("sweep-solenoid", "sweep-gamma"),
    ("sweep-tent", "sweep-gamma"),
    ("noise", "sweep-gamma"),
    ("logistic-demo", "sweep-gamma"),
    ("contour", "contour"),
])
def test_every_suite_csv_renders(suite_dir, tmp_path, name, kind):
    out = tmp_path / f"{name}.png"
    series = render.render(kind, [suite_dir / f"{name}.csv"], out)
    assert out.exists() and out.stat().st_size > 0
    assert series


def test_states_dump_renders_histogram(suite_dir, tmp_path):
    for dump in sorted(suite_dir.glob("noise_*_states.csv")):
        out = tmp_path / (dump.stem + ".png")
        values = render.render("hist", [dump], out)
        assert out.exists() and len(values) > 100


def test_convergence_series_equal_csv_values_exactly(suite_dir, tmp_path):
    path = suite_dir / "converge-A.csv"
    points, _ = render.render("converge-A", [path], tmp_path / "a.png")
    records = [r for r in read_records(path) if r.deriv is not None]
    assert points == [(r.A, r.deriv) for r in records]
