import hashlib
import json
from pathlib import Path

import numpy as np

from gcmchaos.cli import main

FAST_QUANTUM = """
[model]
b = 0.62
hbar = 0.1

[basis]
n_max = 40

[outputs]
directory = {out}
"""

FAST_CLASSICAL = """
[model]
b = 0.62
hbar = 0.1

[classical]
energy = 0.2
seed = 3
n_traj = 2
n_crossings = 12
n_samples = 8
sali_time = 300
t_max = 600
mesh_nx = 10
mesh_npx = 10
freg_energies = 0.2
bounds_b = 0.24, 0.45

[outputs]
directory = {out}
"""


def write_cfg(tmp_path, template, name="run.ini"):
    out = tmp_path / "out"
    cfg = tmp_path / name
    cfg.write_text(template.format(out=out))
    return cfg, out


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_csv(path: Path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# gcmchaos-csv v1"
    body = [l for l in lines[1:] if not l.startswith("#")]
    header = body[0].split(",")
    rows = [l.split(",") for l in body[1:]]
    return header, rows


class TestSpectrum:
    def test_deterministic_rerun(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["spectrum", "--config", str(cfg)]) == 0
        first = sha(out / "spectrum.csv")
        assert main(["spectrum", "--config", str(cfg)]) == 0
        assert sha(out / "spectrum.csv") == first

    def test_missing_config_is_config_error(self, tmp_path, capsys):
        code = main(["spectrum", "--config", str(tmp_path / "nope.ini")])
        assert code == 2
        err = capsys.readouterr().err
        assert "not found" in err and "usage" in err

    def test_quantizations_differ(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["spectrum", "--config", str(cfg)]) == 0
        even = (out / "spectrum.csv").read_text()
        assert main(["spectrum", "--config", str(cfg),
                     "--set", "run.quantization=5d"]) == 0
        assert (out / "spectrum.csv").read_text() != even

    def test_manifest_lists_checksums(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        main(["spectrum", "--config", str(cfg)])
        manifest = json.loads((out / "spectrum.manifest.json").read_text())
        assert manifest["files"]["spectrum.csv"] == sha(out / "spectrum.csv")
        assert manifest["config"]["model"]["B"] == 0.62
        assert "wall_s" in manifest["timings"]


class TestLattice:
    def test_hprime_vanishes_at_b0(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["lattice", "--config", str(cfg),
                     "--set", "model.B=0.0", "--set", "basis.b=0.25"]) == 0
        header, rows = read_csv(out / "lattice.csv")
        col = header.index("p_hprime")
        assert max(abs(float(r[col])) for r in rows) < 1e-8

    def test_identity_column(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["lattice", "--config", str(cfg)]) == 0
        header, rows = read_csv(out / "lattice.csv")
        ie = header.index("energy")
        ihp, ih0 = header.index("p_hprime"), header.index("p_h0")
        for r in rows:
            e, hp, h0 = float(r[ie]), float(r[ihp]), float(r[ih0])
            assert abs(hp - (e - h0) / 0.62) < 1e-8

    def test_rerun_checksum_identical(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        main(["lattice", "--config", str(cfg)])
        first = sha(out / "lattice.csv")
        main(["lattice", "--config", str(cfg)])
        assert sha(out / "lattice.csv") == first

    def test_unknown_operator_rejected(self, tmp_path):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["lattice", "--config", str(cfg), "--operators", "Foo"]) == 2


class TestWavefunction:
    def test_normalization_in_header(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["wavefunction", "--config", str(cfg), "--levels", "0,2",
                     "--points", "101"]) == 0
        text = (out / "wavefunction_0000.csv").read_text()
        norm_line = [l for l in text.splitlines() if l.startswith("# normalization")][0]
        norm = float(norm_line.split("=")[1].split()[0])
        assert 0.98 <= norm <= 1.02

    def test_out_of_range_level_rejected(self, tmp_path):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["wavefunction", "--config", str(cfg),
                     "--levels", "5000"]) == 2

    def test_b0_ground_state_isotropic(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["wavefunction", "--config", str(cfg), "--levels", "0",
                     "--points", "61", "--set", "model.B=0.0",
                     "--set", "basis.b=0.25"]) == 0
        _, rows = read_csv(out / "wavefunction_0000.csv")
        vals = np.array([float(r[2]) for r in rows]).reshape(61, 61)
        assert np.abs(vals - np.rot90(vals)).max() < 1e-10 * vals.max()


class TestClassicalCommands:
    def test_poincare_deterministic(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_CLASSICAL)
        assert main(["poincare", "--config", str(cfg)]) == 0
        first = sha(out / "section.csv")
        assert main(["poincare", "--config", str(cfg)]) == 0
        assert sha(out / "section.csv") == first
        header, rows = read_csv(out / "section.csv")
        assert header == ["traj_id", "x", "px"]
        assert len(rows) == 2 * 12

    def test_freg_values_in_unit_interval(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_CLASSICAL)
        assert main(["freg", "--config", str(cfg)]) == 0
        header, rows = read_csv(out / "freg.csv")
        f = float(rows[0][header.index("f_reg")])
        assert 0.0 <= f <= 1.0
        first = sha(out / "freg.csv")
        main(["freg", "--config", str(cfg)])
        assert sha(out / "freg.csv") == first

    def test_l2map_mask_column(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_CLASSICAL)
        assert main(["l2map", "--config", str(cfg)]) == 0
        header, rows = read_csv(out / "l2map.csv")
        assert header == ["x", "px", "value", "mask"]
        assert len(rows) == 100
        masked = [r for r in rows if r[3] == "1"]
        assert 0 < len(masked) < 100
        assert all(r[2] == "nan" for r in masked)

    def test_bounds_rows(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_CLASSICAL)
        assert main(["bounds", "--config", str(cfg),
                     "--set", "classical.energy=0.0",
                     "--set", "classical.t_max=3000"]) == 0
        header, rows = read_csv(out / "bounds.csv")
        assert [r[0] for r in rows] == ["0.24", "0.45"]
        for r in rows:
            assert float(r[1]) <= float(r[2])


class TestBrodyCommand:
    def test_fit_and_output(self, tmp_path):
        cfg, out = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["brody", "--config", str(cfg),
                     "--set", "basis.n_max=60", "--window=-1.0,10.0"]) == 0
        header, rows = read_csv(out / "brody.csv")
        omega = float(rows[0][header.index("omega")])
        assert -0.5 <= omega <= 1.2
        assert int(rows[0][header.index("n")]) >= 50

    def test_too_few_levels_is_numerical_error(self, tmp_path):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["brody", "--config", str(cfg), "--window", "0.0,0.001"]) == 3


class TestConfigHandling:
    def test_unknown_key_reports_path(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[model]\nfoo = 1\n")
        assert main(["spectrum", "--config", str(cfg)]) == 2
        assert "model.foo" in capsys.readouterr().err

    def test_invalid_value_reports_path(self, tmp_path, capsys):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["spectrum", "--config", str(cfg),
                     "--set", "basis.n_max=-3"]) == 2
        assert "basis.n_max" in capsys.readouterr().err

    def test_bad_set_syntax(self, tmp_path, capsys):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        assert main(["spectrum", "--config", str(cfg), "--set", "nmax"]) == 2

    def test_outdir_env_override(self, tmp_path, monkeypatch):
        cfg, _ = write_cfg(tmp_path, FAST_QUANTUM)
        alt = tmp_path / "alt"
        monkeypatch.setenv("GCMCHAOS_OUTDIR", str(alt))
        assert main(["spectrum", "--config", str(cfg)]) == 0
        assert (alt / "spectrum.csv").is_file()

    def test_defaults_without_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GCMCHAOS_OUTDIR", str(tmp_path / "d"))
        assert main(["spectrum", "--set", "basis.n_max=20",
                     "--set", "model.B=0.3"]) == 0
        assert (tmp_path / "d" / "spectrum.csv").is_file()
