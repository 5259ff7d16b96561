import os
import shutil

import numpy as np
import pytest

from btcplots.figures import FigureSpec, render
from btcplots.io import GridError, SchemaError, read_columns

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fx(name):
    return os.path.join(FIXTURES, name)


def spec_for(kind, inputs, out, **kw):
    return FigureSpec(kind=kind, inputs=inputs, out_path=str(out), **kw)


@pytest.mark.parametrize(
    "kind,files,kw",
    [
        ("dynamics", ["trajectory_N4.csv", "trajectory_N8.csv"], {"fits": "ansatz_fit.json"}),
        ("scaling", ["scaling.csv"], {"fits": "scaling_fits.json"}),
        ("heatmap", ["heatmap.csv"], {}),
        ("observables", ["trajectory_N4.csv", "trajectory_N8.csv"], {}),
        ("mf-compare", ["mf_compare.csv"], {}),
        ("alpha-kappa", ["kappa_scan.csv"], {"log_x": True}),
    ],
)
def test_every_kind_renders_from_fixtures(tmp_path, kind, files, kw):
    if kw.get("fits"):
        kw = dict(kw, fits=fx(kw["fits"]))
    out = tmp_path / f"{kind}.png"
    fig = render(spec_for(kind, [fx(f) for f in files], out, **kw))
    assert out.exists() and out.stat().st_size > 0
    assert fig is not None


def test_dynamics_embeds_only_input_values(tmp_path):
    out = tmp_path / "dyn.png"
    fig = render(spec_for("dynamics", [fx("trajectory_N8.csv")], out))
    data = read_columns(fx("trajectory_N8.csv"))
    (line,) = fig.axes[0].lines
    assert np.array_equal(line.get_xdata(), data["t"])
    assert np.array_equal(line.get_ydata(), data["qfi_over_n"])


def test_dynamics_fit_overlay_adds_dashed_curves(tmp_path):
    out = tmp_path / "dyn.png"
    fig = render(spec_for(
        "dynamics", [fx("trajectory_N4.csv"), fx("trajectory_N8.csv")], out,
        fits=fx("ansatz_fit.json"),
    ))
    lines = fig.axes[0].lines
    assert len(lines) == 4
    assert sum(1 for ln in lines if ln.get_linestyle() == "--") == 2


def test_dynamics_no_rescale_uses_raw_column(tmp_path):
    out = tmp_path / "dyn.png"
    fig = render(spec_for("dynamics", [fx("trajectory_N8.csv")], out,
                          rescale_by_n=False))
    data = read_columns(fx("trajectory_N8.csv"))
    assert np.array_equal(fig.axes[0].lines[0].get_ydata(), data["qfi"])


def test_scaling_annotates_fitted_slope(tmp_path):
    # fixture has gamma = 5/N exactly, so the fitted exponent is -1.00
    out = tmp_path / "scaling.png"
    fig = render(spec_for("scaling", [fx("scaling.csv")], out,
                          fits=fx("scaling_fits.json")))
    texts = [t.get_text() for ax in fig.axes for t in ax.texts]
    assert any("slope -1.00" in t for t in texts)


def test_scaling_single_row_points_only_with_warning(tmp_path):
    src = read_columns(fx("scaling.csv"))
    one_row = tmp_path / "one.csv"
    header = list(src.keys())
    with open(one_row, "w") as fh:
        fh.write(",".join(header) + "\n")
        fh.write(",".join(str(src[c][0]) for c in header) + "\n")
    out = tmp_path / "scaling.png"
    with pytest.warns(UserWarning, match="single-row"):
        fig = render(spec_for("scaling", [str(one_row)], out))
    for ax in fig.axes:
        assert len(ax.lines) == 1  # markers only, no trend line


def test_heatmap_cell_count_and_max_marker(tmp_path):
    out = tmp_path / "heat.png"
    fig = render(spec_for("heatmap", [fx("heatmap.csv")], out))
    ax = fig.axes[0]
    mesh = ax.collections[0]
    assert mesh.get_array().size == 9  # 3x3 grid
    data = read_columns(fx("heatmap.csv"))
    star = ax.lines[0]
    i = int(np.argmax(data["max_qfi"]))
    assert star.get_xdata()[0] == data["delta_omega"][i]
    assert star.get_ydata()[0] == data["delta_phi"][i]


def test_heatmap_nan_cells_masked(tmp_path):
    data_path = tmp_path / "heat_nan.csv"
    shutil.copy(fx("heatmap.csv"), data_path)
    lines = data_path.read_text().splitlines()
    parts = lines[1].split(",")
    parts[2] = parts[3] = "nan"
    lines[1] = ",".join(parts)
    data_path.write_text("\n".join(lines) + "\n")
    fig = render(spec_for("heatmap", [str(data_path)], tmp_path / "h.png"))
    masked = fig.axes[0].collections[0].get_array()
    assert np.ma.is_masked(masked)
    assert masked.mask.sum() == 1


def test_heatmap_two_panel_comparison(tmp_path):
    fig = render(spec_for("heatmap", [fx("heatmap.csv"), fx("heatmap.csv")],
                          tmp_path / "h2.png"))
    meshes = [ax for ax in fig.axes if ax.collections]
    assert len(meshes) >= 2


def test_heatmap_incomplete_grid_lists_missing(tmp_path):
    data_path = tmp_path / "partial.csv"
    lines = fx("heatmap.csv")
    content = open(lines).read().splitlines()
    del content[2]
    data_path.write_text("\n".join(content) + "\n")
    with pytest.raises(GridError, match="missing points"):
        render(spec_for("heatmap", [str(data_path)], tmp_path / "h.png"))


def test_mf_compare_draws_all_columns(tmp_path):
    fig = render(spec_for("mf-compare", [fx("mf_compare.csv")], tmp_path / "mf.png"))
    data = read_columns(fx("mf_compare.csv"))
    n_exact = sum(1 for c in data if c.startswith("qfi_exact_over_n_"))
    assert len(fig.axes[0].lines) == n_exact + 1
    dashed = [ln for ln in fig.axes[0].lines if ln.get_linestyle() == "--"]
    assert np.array_equal(dashed[0].get_ydata(), data["qfi_mf_over_n"])


def test_alpha_kappa_points_match_file(tmp_path):
    fig = render(spec_for("alpha-kappa", [fx("kappa_scan.csv")], tmp_path / "ak.png"))
    data = read_columns(fx("kappa_scan.csv"))
    line = fig.axes[0].lines[0]
    order = np.argsort(data["kappa_over_omega0"])
    assert np.array_equal(line.get_ydata(), data["alpha_inf"][order])


def test_empty_csv_is_schema_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        render(spec_for("dynamics", [str(empty)], tmp_path / "x.png"))


def test_missing_column_named_in_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,qfi\n0,0\n1,1\n")
    with pytest.raises(SchemaError, match="qfi_over_n"):
        render(spec_for("dynamics", [str(bad)], tmp_path / "x.png"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError, match="unknown figure kind"):
        FigureSpec(kind="pie", inputs=["x.csv"], out_path=str(tmp_path / "x.png"))
