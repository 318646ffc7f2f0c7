import numpy as np
import pytest

from landau_plots import PlotSpec, read_timeseries, reference_envelope, render
from landau_plots.cli import main
from landau_plots.csvdata import SchemaError

HEADER = ("t,mass,px,py,pz,energy,entropy,dissipation,fisher,fisher_sqrt,"
          "l2_1.5,l2_2,l2_2.25,l3_m3,h3,min_f,max_f,dt")


def synthetic_csv(path, fisher_fn):
    ts = np.linspace(0.05, 1.0, 40)
    lines = ["# landau timeseries v1", "# config: N=32 L=5 n=4 synthetic", HEADER]
    for t in ts:
        I = fisher_fn(t)
        row = [t, 5.568, 0.0, 0.0, 0.0, 4.176, -8.35, 0.1, I, I / 4,
               1.4, 1.5, 1.6, 0.8, 0.2, 0.0, 1.0, 1e-3]
        lines.append(",".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def test_render_power_law_parallel_to_reference(tmp_path):
    csv = tmp_path / "ts.csv"
    synthetic_csv(csv, lambda t: 2.0 * t**-4.5)
    out = tmp_path / "figs"
    code = main(["render", "--input", str(csv), "--out", str(out),
                 "--figures", "fisher_envelope", "--tmin", "0.1"])
    assert code == 0
    assert (out / "ts_fisher_envelope.png").exists()
    # the data curve and the anchored reference have the same log-log slope
    data = read_timeseries(csv)
    past = data.t >= 0.1
    t = data.t[past]
    ref = reference_envelope(t, t[0], data["fisher"][past][0])
    slope_data = np.polyfit(np.log(t), np.log(data["fisher"][past]), 1)[0]
    slope_ref = np.polyfit(np.log(t), np.log(ref), 1)[0]
    assert slope_data == pytest.approx(slope_ref, abs=1e-9)
    assert slope_data == pytest.approx(-4.5, abs=1e-9)


def test_render_all_figures(tmp_path):
    csv = tmp_path / "ts.csv"
    synthetic_csv(csv, lambda t: 30.0 * np.exp(-t))
    out = tmp_path / "figs"
    code = main(["render", "--input", str(csv), "--out", str(out)])
    assert code == 0
    for name in ("fisher_envelope", "entropy", "conservation", "l2_window", "h3"):
        assert (out / f"ts_{name}.png").exists()


def test_render_is_idempotent(tmp_path):
    csv = tmp_path / "ts.csv"
    synthetic_csv(csv, lambda t: 2.0 * t**-4.5)
    out = tmp_path / "figs"
    spec = PlotSpec(inputs=[str(csv)], out_dir=str(out),
                    figures=("entropy",), t_min=0.1)
    first = render(spec)
    before = (out / "ts_entropy.png").read_bytes()
    second = render(spec)
    assert first == second
    assert (out / "ts_entropy.png").read_bytes() == before


def test_l2_window_overlay_from_report(tmp_path):
    csv = tmp_path / "ts.csv"
    synthetic_csv(csv, lambda t: 30.0 * np.exp(-t))
    report = tmp_path / "report.txt"
    report.write_text(
        "check=l2_window status=pass k=2.25 t0=0.05 Ck=1 t1=0.19 Y0=2.56 "
        "sup_Y=2.6 bound=3.62\n")
    out = tmp_path / "figs"
    code = main(["render", "--input", str(csv), "--out", str(out),
                 "--figures", "l2_window", "--report", str(report)])
    assert code == 0
    assert (out / "ts_l2_window.png").exists()


def test_schema_error_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,mass\n0.0,1.0\n")
    code = main(["render", "--input", str(bad), "--out", str(tmp_path / "f"),
                 "--figures", "entropy"])
    assert code == 2


def test_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(HEADER.replace(",h3,", ",hx,") + "\n" + "0.1," * 17 + "0.1\n")
    with pytest.raises(SchemaError, match="h3"):
        read_timeseries(bad)


def test_spec_requires_figures():
    with pytest.raises(ValueError, match="at least one"):
        PlotSpec(inputs=["x.csv"], out_dir="y", figures=())
