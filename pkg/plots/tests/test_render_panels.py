"""Tests for panel rendering and the improvement-factor series."""

import pytest

import hmatplots
from csvfixtures import bench_row, make_sweep_csv, method_pair, write_rows
from hmatplots import if_series, render

SIZE_PANELS = ("error_vs_n", "compression_vs_n", "if_vs_n")
EPS_PANELS = ("error_vs_eps", "compression_vs_eps", "if_vs_eps", "compression_vs_achieved")


def test_one_group_yields_exactly_the_three_size_panels(tmp_path):
    out = tmp_path / "panels"
    written = render(make_sweep_csv(tmp_path), out)
    expected = {f"cube_invpow2_{p}.png" for p in SIZE_PANELS}
    assert {p.name for p in out.glob("*.png")} == expected
    assert sorted(written) == sorted(str(out / name) for name in expected)
    assert all((out / name).stat().st_size > 0 for name in expected)


def test_kernel_labels_lose_their_colon_in_filenames(tmp_path):
    rows = method_pair(256, 1000, 800, geometry="edge", kernel="log")
    rows += method_pair(256, 900, 700, geometry="surf", kernel="invpow:3")
    written = render(write_rows(tmp_path / "a.csv", rows), tmp_path / "out")
    names = {w.rsplit("/", 1)[-1] for w in written}
    assert "edge_log_error_vs_n.png" in names
    assert "surf_invpow3_if_vs_n.png" in names
    assert len(names) == 6  # two groups, three panels each


def test_header_only_csv_draws_nothing_and_warns(tmp_path, capsys):
    out = tmp_path / "out"
    assert render(write_rows(tmp_path / "a.csv", []), out) == []
    assert "nothing to draw" in capsys.readouterr().err
    assert list(out.glob("*.png")) == []


def test_all_failed_rows_draw_nothing(tmp_path, capsys):
    rows = [bench_row(error_mode="error:unconverged-norm", nnz=None)]
    assert render(write_rows(tmp_path / "a.csv", rows), tmp_path / "out") == []
    err = capsys.readouterr().err
    assert "dropping 1 failed row" in err and "nothing to draw" in err


def test_a_tolerance_sweep_adds_the_four_epsilon_panels(tmp_path):
    rows = []
    for k, eps in enumerate((1e-3, 1e-4, 1e-5, 1e-6)):
        rows += method_pair(
            512,
            brem_nnz=2000 * (k + 1),
            mrem_nnz=1000 * (k + 1),
            epsilon=eps,
            achieved_rel_error=eps / 3.0,
        )
    out = tmp_path / "out"
    written = render(write_rows(tmp_path / "a.csv", rows), out)
    names = {p.name for p in out.glob("*.png")}
    assert names == {f"cube_invpow2_{p}.png" for p in SIZE_PANELS + EPS_PANELS}
    assert len(written) == 7


def test_single_method_csvs_still_render_all_three_panels(tmp_path, capsys):
    rows = [bench_row(N=n, nnz=100 * n) for n in (128, 256)]
    out = tmp_path / "out"
    render(write_rows(tmp_path / "a.csv", rows), out)
    assert {p.name for p in out.glob("*.png")} == {
        f"cube_invpow2_{p}.png" for p in SIZE_PANELS
    }
    assert "skipping incomplete point" in capsys.readouterr().err


def test_render_creates_the_output_directory(tmp_path):
    out = tmp_path / "a" / "b" / "c"
    render(make_sweep_csv(tmp_path), out)
    assert out.is_dir() and list(out.glob("*.png"))


def test_if_series_matches_the_storage_ratios(tmp_path):
    series = if_series(make_sweep_csv(tmp_path))
    assert series == {
        ("cube", "invpow:2", 256): pytest.approx(4000 / 2500),
        ("cube", "invpow:2", 512): pytest.approx(8000 / 5000),
        ("cube", "invpow:2", 1024): pytest.approx(12000 / 7500),
    }


def test_if_series_prefers_the_tightest_tolerance_per_size(tmp_path):
    rows = method_pair(256, 1000, 800, epsilon=1e-3)
    rows += method_pair(256, 3000, 1000, epsilon=1e-6)
    series = if_series(write_rows(tmp_path / "a.csv", rows))
    assert series == {("cube", "invpow:2", 256): pytest.approx(3.0)}


def test_package_exposes_the_documented_surface():
    assert callable(hmatplots.render) and callable(hmatplots.if_series)
    assert len(hmatplots.CSV_COLUMNS) == 20
