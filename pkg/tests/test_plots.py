"""SVG rendering of reports, simulations and Monte Carlo tables."""
from gof import TestReport, run_battery
from harness import CoverageRow, JointRow
from intensity import ExponentialHazard, IntensityModel
from plots import render_coverage, render_joint, render_plots, render_simulation
from rescale import time_transform
from simulate import RngStream, sample_unit_exponentials, thin_simulate
from trains import TransformedTrain


def _battery():
    tt = TransformedTrain.from_intervals(sample_unit_exponentials(300, RngStream(12)))
    return run_battery(tt, n_perm=200, rng=RngStream(1))


def test_one_svg_per_test():
    svgs = render_plots(_battery())
    assert set(svgs) == {"uniform", "berman", "serial", "variance_time", "wiener"}
    for text in svgs.values():
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text


def test_wiener_plot_has_a_step_path_and_dotted_boundaries():
    svg = render_plots([_battery()["wiener"]])["wiener"]
    assert svg.count("<path") >= 3
    assert "stroke-dasharray" in svg


def test_rendering_is_byte_reproducible():
    battery = _battery()
    assert render_plots(battery) == render_plots(battery)


def test_empty_plot_data_is_skipped_with_a_warning(tmp_path, caplog):
    report = TestReport("wiener", {}, None, {0.05: True})
    svgs = render_plots([report], out_dir=tmp_path)
    assert svgs == {}
    assert list(tmp_path.iterdir()) == []
    assert "No plot data for wiener" in caplog.text


def test_files_are_written_when_asked(tmp_path):
    render_plots(_battery(), out_dir=tmp_path / "plots")
    names = sorted(p.name for p in (tmp_path / "plots").iterdir())
    assert names == ["berman.svg", "serial.svg", "uniform.svg", "variance_time.svg", "wiener.svg"]


def test_simulation_figures():
    model = IntensityModel(ExponentialHazard(5.0))
    train = thin_simulate(model, 20.0, RngStream(2))
    svgs = render_simulation(train, model, time_transform(train, model), points=200)
    assert set(svgs) == {"intensity", "counting"}


def test_coverage_figure_uses_gray_bands():
    rows = [
        CoverageRow(n, 1000, level, int(level * 1000), level, level - 0.01, level + 0.01)
        for n in (10, 50) for level in (0.95, 0.99)
    ]
    svg = render_coverage(rows)["coverage"]
    assert "#d9d9d9" in svg
    assert render_coverage([]) == {}


def test_joint_figure_ignores_the_union_row():
    rows = [
        JointRow(100, 1000, 0.05, "bermanxuniform", 3, 50, 48, 0, 6),
        JointRow(100, 1000, 0.05, "wienerxberman", 0, 52, 50, 0, 6),
        JointRow(100, 1000, 0.05, "union", 120, 50, 50, 120, 160),
    ]
    assert set(render_joint(rows)) == {"joint"}
    assert render_joint(rows[-1:]) == {}
