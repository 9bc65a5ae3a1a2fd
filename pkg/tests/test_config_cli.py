import hashlib
import json
import textwrap

import numpy as np
import pytest

from gmcf.cli import main
from gmcf.config import ConfigError, RunConfig, parse_config, serialize_config
from gmcf.gridio import read_grid

FLOW_TEXT = textwrap.dedent("""\
    [run]
    subcommand = flow
    seed = 3

    [flow]
    geometry = interval
    domain = reaper_interval
    initial = grim_reaper_pair
    h = 0.02
    t_end = 0.01
    n_frames = 3
    """)


def test_parse_serialize_roundtrip():
    cfg = parse_config(FLOW_TEXT)
    assert cfg.subcommand == "flow" and cfg.seed == 3
    assert cfg.params["h"] == 0.02
    text2 = serialize_config(cfg)
    assert parse_config(text2) == cfg
    # canonical text is a fixed point
    assert serialize_config(parse_config(text2)) == text2


def test_defaults_filled():
    cfg = parse_config(FLOW_TEXT)
    assert cfg.params["n_frames"] == 3          # explicit wins
    assert cfg.params["data"] == 0.0
    assert cfg.params["sigma_cfl"] == 0.0
    assert cfg.params["h_cap"] == 1e6
    assert cfg.params["dim"] == 2
    assert cfg.out == "gmcf-out" and cfg.threads == 1


def test_violations_are_aggregated():
    text = textwrap.dedent("""\
        [run]
        subcommand = flow
        seed = -4

        [flow]
        geometry = helical
        domain = reaper_interval
        initial = grim_reaper_pair
        t_end = 0.1
        spacing = 0.1

        [extra]
        x = 1
        """)
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    msgs = exc.value.violations
    assert len(msgs) == 5
    joined = "\n".join(msgs)
    assert "[run] seed" in joined
    assert "geometry: must be one of" in joined
    assert "unknown key 'spacing'" in joined
    assert "inapplicable section [extra]" in joined
    assert "missing required key 'h'" in joined


def test_schedule_checks():
    base = textwrap.dedent("""\
        [run]
        subcommand = cascade

        [cascade]
        geometry = radial
        domain = unit_disk
        initial = proper_disk_profile
        r_schedule = %s
        h = 0.05
        t_end = 0.05
        """)
    with pytest.raises(ConfigError) as exc:
        parse_config(base % "16,8")
    assert any("strictly increasing" in v for v in exc.value.violations)
    with pytest.raises(ConfigError) as exc:
        parse_config(base % "0.5,8")
    assert any("exceed 1" in v for v in exc.value.violations)
    cfg = parse_config(base % "8,16")
    assert cfg.params["r_schedule"] == (8.0, 16.0)


def test_h_inf_h_cap_cross_check():
    text = textwrap.dedent("""\
        [run]
        subcommand = cascade

        [cascade]
        geometry = radial
        domain = unit_disk
        initial = proper_disk_profile
        r_schedule = 8,16
        h = 0.05
        t_end = 0.05
        h_inf = 1e9
        h_cap = 1e3
        """)
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert any("h_inf must be strictly below h_cap" in v
               for v in exc.value.violations)


def test_subcommand_conflict_and_absence():
    with pytest.raises(ConfigError) as exc:
        parse_config(FLOW_TEXT, subcommand="smooth")
    assert any("conflicts" in v for v in exc.value.violations)
    with pytest.raises(ConfigError) as exc:
        parse_config("[flow]\nh = 0.1\n")
    assert any("subcommand missing" in v for v in exc.value.violations)


def test_unparseable_text():
    with pytest.raises(ConfigError):
        parse_config("not an ini file at all\n")


# ---------------------------------------------------------------------------
# the command line
# ---------------------------------------------------------------------------

def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_cli_flow_interval(tmp_path, capsys):
    cfgp = _write(tmp_path / "flow.ini", FLOW_TEXT)
    out = tmp_path / "out"
    rc = main(["flow", "--config", cfgp, "--out", str(out)])
    assert rc == 0
    for name in ("flow_frames.csv", "flow_diag.csv", "manifest.json"):
        assert (out / name).exists(), name

    man = json.loads((out / "manifest.json").read_text())
    assert man["subcommand"] == "flow"
    assert man["seed"] == 3
    assert man["exit_code"] == 0
    assert man["config_sha256"] == hashlib.sha256(man["config"].encode()).hexdigest()
    assert set(man["versions"]) >= {"artifact", "python", "numpy", "scipy", "numba"}
    names = {o["name"] for o in man["outputs"]}
    assert names == {"flow_frames.csv", "flow_diag.csv"}
    for o in man["outputs"]:
        blob = (out / o["name"]).read_bytes()
        assert o["bytes"] == len(blob)
        assert o["sha256"] == hashlib.sha256(blob).hexdigest()

    header = (out / "flow_frames.csv").read_text().splitlines()[0]
    assert header == "t,x,u"


def test_cli_flow_graph2d_writes_grids(tmp_path):
    text = textwrap.dedent("""\
        [run]
        subcommand = flow

        [flow]
        geometry = graph2d
        domain = unit_disk
        initial = cap_bump_2d
        h = 0.0625
        t_end = 0.005
        n_frames = 2
        """)
    cfgp = _write(tmp_path / "g2.ini", text)
    out = tmp_path / "out"
    rc = main(["flow", "--config", cfgp, "--out", str(out)])
    assert rc == 0
    dump = read_grid(out / "flow_t0000.gmcf")
    assert dump.dim == 2
    assert dump.spacing == 0.0625
    assert np.isfinite(dump.values).any()
    times = (out / "flow_times.csv").read_text().splitlines()
    assert times[0] == "frame,t"
    assert len(times) == 3


def test_cli_determinism_across_threads(tmp_path, monkeypatch):
    cfgp = _write(tmp_path / "flow.ini", FLOW_TEXT)
    outs = []
    for tag, threads in (("a", "1"), ("b", "4")):
        monkeypatch.setenv("GMCF_THREADS", threads)
        out = tmp_path / tag
        assert main(["flow", "--config", cfgp, "--out", str(out)]) == 0
        outs.append(out)
    a, b = outs
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        if name == "manifest.json":
            continue
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"]
    assert (ma["threads"], mb["threads"]) == (1, 4)


def test_cli_bad_config_exits_2(tmp_path, capsys):
    cfgp = _write(tmp_path / "bad.ini", "[run]\nsubcommand = flow\n\n[flow]\n")
    rc = main(["flow", "--config", cfgp, "--out", str(tmp_path / "o")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "missing required key" in err


def test_cli_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["flow", "--config", str(tmp_path / "nope.ini")])
    assert rc == 2
    assert "cannot read config" in capsys.readouterr().err


def test_cli_subcommand_conflict_exits_2(tmp_path, capsys):
    cfgp = _write(tmp_path / "flow.ini", FLOW_TEXT)
    rc = main(["smooth", "--config", cfgp])
    assert rc == 2
    assert "conflicts" in capsys.readouterr().err


def test_cli_infeasible_smoothing_exits_3(tmp_path, capsys):
    text = textwrap.dedent("""\
        [run]
        subcommand = smooth

        [smooth]
        domain_a = lens_left
        domain_b = lens_right
        eps = 0.2
        delta = 0.9
        """)
    cfgp = _write(tmp_path / "sm.ini", text)
    rc = main(["smooth", "--config", cfgp, "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "infeasible" in capsys.readouterr().err


def test_cli_inadmissible_probe_exits_5(tmp_path, capsys):
    probes = tmp_path / "probes.csv"
    probes.write_text("designation,cx,cy,r0,t0\ninside,0.0,0.0,0.98,0.0\n",
                      encoding="utf-8")
    text = textwrap.dedent("""\
        [run]
        subcommand = shadow

        [shadow]
        geometry = radial
        domain = unit_disk
        initial = proper_disk_profile
        r_schedule = 1024,2048
        h = 0.03125
        t_end = 0.05
        n_frames = 5
        probes_file = %s
        """) % probes
    cfgp = _write(tmp_path / "sh.ini", text)
    rc = main(["shadow", "--config", cfgp, "--out", str(tmp_path / "o")])
    assert rc == 5
    assert "inadmissible probe" in capsys.readouterr().err


def test_cli_verify_passes(tmp_path):
    text = "[run]\nsubcommand = verify\n\n[verify]\nn_samples = 400\n"
    cfgp = _write(tmp_path / "v.ini", text)
    out = tmp_path / "o"
    rc = main(["verify", "--config", cfgp, "--out", str(out)])
    assert rc == 0
    report = (out / "verify_report.txt").read_text()
    assert "verdict: pass" in report and "FAIL" not in report


def test_cli_rejects_unknown_subcommand(tmp_path):
    cfgp = _write(tmp_path / "flow.ini", FLOW_TEXT)
    with pytest.raises(SystemExit):
        main(["melt", "--config", cfgp])
