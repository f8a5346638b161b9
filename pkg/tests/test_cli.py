"""End-to-end command tests: exit codes, outputs, manifests, determinism."""

import hashlib
import json

import numpy as np
import pytest

from permlab.assay import MEMBRANES
from permlab.cli import main
from permlab.data.synth import assign_folds
from permlab.data.tables import (
    MeasurementTable,
    PlateRecord,
    load_measurements,
    write_measurements,
)

N_COMPOUNDS = 40


def _write_inputs(root):
    rng = np.random.default_rng(5)
    ids = [f"C{i:04d}" for i in range(1, N_COMPOUNDS + 1)]
    X = rng.normal(size=(N_COMPOUNDS, 38))
    W = rng.normal(size=(6, len(MEMBRANES)))
    logpe = X[:, :6] @ W * 0.25 - 5.0 + 0.02 * rng.normal(size=(N_COMPOUNDS, len(MEMBRANES)))

    records = []
    for i, cid in enumerate(ids):
        for plate in (1, 2):
            lp = {
                m: float(logpe[i, j] + 0.01 * (plate - 1))
                for j, m in enumerate(MEMBRANES)
            }
            records.append(
                PlateRecord(
                    cid,
                    plate,
                    {m: 0.15 for m in MEMBRANES},
                    {m: 10.0 ** lp[m] for m in MEMBRANES},
                    lp,
                )
            )
    write_measurements(root / "measurements.csv", MeasurementTable(records))

    folds = assign_folds(ids, seed=11)
    lines = ["compound_id,fold," + ",".join(f"f{j}" for j in range(38))]
    for i, cid in enumerate(ids):
        cells = ",".join("%.17g" % v for v in X[i])
        lines.append(f"{cid},{folds.fold_of(cid)},{cells}")
    (root / "percepta.csv").write_text("\n".join(lines) + "\n")

    (root / "smiles.csv").write_text(
        "compound_id,smiles\n"
        "C0001,Cc1ccccc1\n"
        "C0002,Oc1ccccc1\n"
        "C0003,c1ccccc1\n"
        "C0004,CCCCO\n"
        "C0005,CCCCN\n"
        "C0006,OC(=O)c1ccccc1CC.[Na+]\n"
        "C0007,C1CC\n"
    )
    (root / "conc.csv").write_text(
        "compound_id,plate_number,membrane,donor_initial,donor_final,acceptor_final\n"
        "A1,1,BBB,1.0,0.4,0.25\n"
        "A1,1,DOD,1.0,0.95,0.001\n"
        "A2,1,BBB,1.0,0.5,0.1\n"
    )
    (root / "badplate.csv").write_text(
        "compound_id,plate_number,membrane,donor_initial,donor_final,acceptor_final\n"
        "A1,xx,BBB,1.0,0.4,0.25\n"
    )
    (root / "zero.csv").write_text("")


CONFIG_TEMPLATE = """\
seed = 11
selection_threshold = 0.5
pca_components = 2

[inputs]
measurements = "{meas}"
smiles = "{smiles}"

[inputs.descriptors]
percepta = "{percepta}"

[sweep]
representations = ["percepta"]
model_classes = [{classes}]

[[sweep.grids.EN]]
alpha = 0.01
l1_ratio = 0.5
[[sweep.grids.EN]]
alpha = 0.1
l1_ratio = 1.0
[[sweep.grids.MTEN]]
alpha = 0.01
l1_ratio = 0.5
[[sweep.grids.PLS]]
n_components = 2
[[sweep.grids.PLS]]
n_components = 5

[profiles]
membranes = ["H", "BBB", "DOD"]
k = 5
properties = ["f0", "f1", "nosuch"]
"""


def _write_config(root, name="run.toml", classes='"EN", "MTEN", "PLS"', extra=""):
    text = CONFIG_TEMPLATE.format(
        meas=(root / "measurements.csv").as_posix(),
        smiles=(root / "smiles.csv").as_posix(),
        percepta=(root / "percepta.csv").as_posix(),
        classes=classes,
    )
    path = root / name
    path.write_text(text + extra)
    return path


@pytest.fixture(scope="module")
def cli_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    _write_inputs(root)
    return root


@pytest.fixture(scope="module")
def run_config(cli_root):
    return _write_config(cli_root)


# --------------------------------------------------------- config failures


def test_unknown_model_class_exits_2(cli_root, capsys):
    cfg = _write_config(cli_root, "badclass.toml", classes='"EN", "XGBoost"')
    assert main(["sweep", "-c", str(cfg), "-o", str(cli_root / "o1")]) == 2
    err = capsys.readouterr().err
    assert "XGBoost" in err
    assert not (cli_root / "o1").exists()  # rejected before any compute


def test_missing_input_file_exits_2(cli_root, capsys):
    cfg = _write_config(cli_root, "badpath.toml")
    text = cfg.read_text().replace("measurements.csv", "nosuch.csv")
    cfg.write_text(text)
    assert main(["sweep", "-c", str(cfg), "-o", str(cli_root / "o2")]) == 2
    assert "nosuch.csv" in capsys.readouterr().err


def test_broken_toml_exits_2(cli_root, capsys):
    cfg = cli_root / "broken.toml"
    cfg.write_text("sweep = [unclosed\n")
    assert main(["sweep", "-c", str(cfg), "-o", str(cli_root / "o3")]) == 2
    assert "error:" in capsys.readouterr().err


def test_representation_without_descriptor_exits_2(cli_root, capsys):
    cfg = _write_config(cli_root, "norep.toml")
    text = cfg.read_text().replace('["percepta"]', '["percepta", "cddd"]')
    cfg.write_text(text)
    assert main(["sweep", "-c", str(cfg), "-o", str(cli_root / "o4")]) == 2
    assert "cddd" in capsys.readouterr().err


# ------------------------------------------------------------------ assay


def test_assay_from_raw_concentrations(cli_root, tmp_path, capsys):
    out = tmp_path / "assay"
    assert main(["assay", "--in", str(cli_root / "conc.csv"), "-o", str(out)]) == 0
    table = load_measurements(out / "measurements.csv")
    assert len(table.records) == 2
    first = table.records[0]
    assert first.compound_id == "A1"
    assert first.mr["BBB"] == pytest.approx(0.1)
    assert first.pe["BBB"] > 0.0
    assert first.mr["L"] is None  # membrane absent from the input rows
    assert (out / "measurements_mean.csv").is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["outputs"]) == {"measurements.csv", "measurements_mean.csv"}


def test_assay_rejects_malformed_plate(cli_root, tmp_path, capsys):
    code = main(["assay", "--in", str(cli_root / "badplate.csv"), "-o", str(tmp_path / "x")])
    assert code == 2
    assert "plate_number" in capsys.readouterr().err


def test_assay_rejects_empty_file(cli_root, tmp_path, capsys):
    code = main(["assay", "--in", str(cli_root / "zero.csv"), "-o", str(tmp_path / "x")])
    assert code == 2


def test_assay_rejects_alien_schema(cli_root, tmp_path, capsys):
    code = main(["assay", "--in", str(cli_root / "smiles.csv"), "-o", str(tmp_path / "x")])
    assert code == 2
    assert "schema" in capsys.readouterr().err


# ------------------------------------------------------- small commands


def test_desalt_command(cli_root, tmp_path, capsys):
    out = tmp_path / "desalt"
    assert main(["desalt", "--in", str(cli_root / "smiles.csv"), "-o", str(out)]) == 0
    lines = (out / "desalted.csv").read_text().splitlines()
    assert lines[0] == "compound_id,smiles,desalted_smiles,error"
    rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
    assert rows["C0006"][2] != "" and "[Na+]" not in rows["C0006"][2]
    assert rows["C0007"][2] == "" and rows["C0007"][3] != ""
    assert "1 failed" in capsys.readouterr().out


def test_pca_command(cli_root, run_config, tmp_path):
    out = tmp_path / "pca"
    assert main(["pca", "-c", str(run_config), "-o", str(out)]) == 0
    payload = json.loads((out / "pca_model.json").read_text())
    ratios = payload["explained_variance_ratio"]
    assert len(ratios) == 2 and ratios[0] >= ratios[1] > 0
    assert payload["n_samples"] == N_COMPOUNDS
    lines = (out / "pca_scores.csv").read_text().splitlines()
    assert lines[0] == "compound_id,PCA_0,PCA_1"
    assert len(lines) == 1 + N_COMPOUNDS


def test_profiles_command(cli_root, run_config, tmp_path):
    out = tmp_path / "profiles"
    assert main(["profiles", "-c", str(run_config), "-o", str(out)]) == 0
    body = (out / "profiles.csv").read_text()
    assert "missing_property" in body and "nosuch" in body
    assert (out / "profiles_f0.svg").is_file()
    assert (out / "profiles_f1.svg").is_file()
    assert not (out / "profiles_nosuch.svg").exists()


def test_scaffolds_command(cli_root, run_config, tmp_path):
    out = tmp_path / "scaffolds"
    assert main(["scaffolds", "-c", str(run_config), "-o", str(out)]) == 0
    lines = (out / "scaffolds.csv").read_text().splitlines()
    assert lines[0] == "scaffold,count,compound_ids"
    top = lines[1].split(",")
    # three plain aromatics plus the desalted benzoate share one carbon ring
    assert int(top[1]) == 4
    assert any(line.startswith("FAILED:C0007") for line in lines)


def test_design_doptimal(cli_root, run_config, tmp_path):
    out = tmp_path / "dopt"
    code = main(
        ["design", "--method", "doptimal", "--k", "3", "-c", str(run_config), "-o", str(out)]
    )
    assert code == 0
    lines = (out / "design.csv").read_text().splitlines()
    assert lines[0] == "rank,row_index,compound_id"
    picked = [line.split(",")[1] for line in lines[1:]]
    assert len(picked) == 3 and len(set(picked)) == 3


def test_design_forward(cli_root, run_config, tmp_path):
    out = tmp_path / "fwd"
    code = main(
        [
            "design", "--method", "forward", "--k", "2", "--target", "BBB_LogPe",
            "--family", "OLS", "-c", str(run_config), "-o", str(out),
        ]
    )
    assert code == 0
    lines = (out / "design.csv").read_text().splitlines()
    assert lines[0] == "rank,feature_index,feature_name"
    assert len(lines) == 3
    # the planted signal lives in the first six descriptor columns
    assert int(lines[1].split(",")[1]) < 6


def test_design_argument_guards(cli_root, run_config, tmp_path, capsys):
    out = str(tmp_path / "bad")
    assert main(["design", "--method", "doptimal", "--k", "0",
                 "-c", str(run_config), "-o", out]) == 2
    assert main(["design", "--method", "forward", "--k", "2",
                 "-c", str(run_config), "-o", out]) == 2
    capsys.readouterr()


def test_out_dir_precedence(cli_root, tmp_path, monkeypatch):
    cfg = _write_config(cli_root, "outdir.toml")
    cfg.write_text(f'out_dir = "{(tmp_path / "from_file").as_posix()}"\n' + cfg.read_text())
    smi = str(cli_root / "smiles.csv")

    monkeypatch.delenv("PERMLAB_OUT", raising=False)
    assert main(["desalt", "-c", str(cfg), "--in", smi]) == 0
    assert (tmp_path / "from_file" / "desalted.csv").is_file()

    monkeypatch.setenv("PERMLAB_OUT", str(tmp_path / "from_env"))
    assert main(["desalt", "-c", str(cfg), "--in", smi]) == 0
    assert (tmp_path / "from_env" / "desalted.csv").is_file()

    assert main(["desalt", "-c", str(cfg), "--in", smi, "-o", str(tmp_path / "from_flag")]) == 0
    assert (tmp_path / "from_flag" / "desalted.csv").is_file()


# --------------------------------------------------------------- pipeline


@pytest.fixture(scope="module")
def pipeline_out(run_config, tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe")
    code = main(["pipeline", "-c", str(run_config), "-o", str(out)])
    assert code == 0
    return out


def test_pipeline_artifacts(pipeline_out):
    expected = {
        "measurements_mean.csv",
        "folds.csv",
        "pca_scores.csv",
        "pca_model.json",
        "trials.csv",
        "trials.json",
        "selection.csv",
        "pairing.csv",
        "importance.csv",
        "importance.svg",
        "profiles.csv",
        "profiles_f0.svg",
        "profiles_f1.svg",
        "scaffolds.csv",
    }
    assert expected <= {p.name for p in pipeline_out.iterdir()}
    # EN 2x8, MTEN 1x6, PLS single 2x8 + joint 2x6
    lines = (pipeline_out / "trials.csv").read_text().splitlines()
    assert len(lines) == 1 + 16 + 6 + 16 + 12


def test_pipeline_manifest_hashes(pipeline_out):
    manifest = json.loads((pipeline_out / "manifest.json").read_text())
    assert manifest["seed"] == 11
    assert len(manifest["config_sha256"]) == 64
    assert manifest["failures"] == []
    assert list(manifest["outputs"]) == sorted(manifest["outputs"])
    assert "manifest.json" not in manifest["outputs"]
    for name, digest in manifest["outputs"].items():
        body = (pipeline_out / name).read_bytes()
        assert hashlib.sha256(body).hexdigest() == digest, name


def test_pipeline_selection_content(pipeline_out):
    lines = (pipeline_out / "selection.csv").read_text().splitlines()
    assert len(lines) == 1 + 8 + 6 + 8 + 6  # one tuned entry per group
    best = [line for line in lines[1:] if line.endswith(",1")]
    assert len(best) == 8  # one winner per target


def test_pipeline_rerun_is_byte_identical(run_config, pipeline_out, tmp_path):
    out2 = tmp_path / "again"
    assert main(["pipeline", "-c", str(run_config), "-o", str(out2)]) == 0
    for name in ("trials.csv", "selection.csv", "pairing.csv"):
        assert (out2 / name).read_bytes() == (pipeline_out / name).read_bytes(), name
    m1 = json.loads((pipeline_out / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["config_sha256"] == m2["config_sha256"]
    assert m1["outputs"] == m2["outputs"]


def test_pipeline_workers_do_not_change_bytes(run_config, pipeline_out, tmp_path):
    out2 = tmp_path / "threaded"
    assert main(["pipeline", "-c", str(run_config), "-o", str(out2), "--workers", "3"]) == 0
    for name in ("trials.csv", "selection.csv"):
        assert (out2 / name).read_bytes() == (pipeline_out / name).read_bytes(), name
    m2 = json.loads((out2 / "manifest.json").read_text())
    m1 = json.loads((pipeline_out / "manifest.json").read_text())
    assert m1["config_sha256"] == m2["config_sha256"]  # workers are not hashed


def test_select_reuses_cached_trials(run_config, tmp_path, capsys):
    out = tmp_path / "cache"
    assert main(["sweep", "-c", str(run_config), "-o", str(out)]) == 0
    capsys.readouterr()
    assert main(["select", "-c", str(run_config), "-o", str(out)]) == 0
    assert "reusing" in capsys.readouterr().out
    assert (out / "selection.csv").is_file()
    assert main(["select", "--fresh", "-c", str(run_config), "-o", str(out)]) == 0
    assert "reusing" not in capsys.readouterr().out


def test_cached_trials_keyed_by_config(run_config, tmp_path, capsys):
    out = tmp_path / "cache2"
    assert main(["sweep", "-c", str(run_config), "-o", str(out)]) == 0
    capsys.readouterr()
    # a different seed is a different computation: the cache must miss
    assert main(["select", "-c", str(run_config), "-o", str(out), "--seed", "12"]) == 0
    assert "reusing" not in capsys.readouterr().out


def test_test_command_evaluates_held_out_fold(run_config, tmp_path, capsys):
    out = tmp_path / "testcmd"
    assert main(["test", "-c", str(run_config), "-o", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "multitask wins" in stdout
    lines = (out / "selection.csv").read_text().splitlines()
    tested = [line for line in lines[1:] if line.split(",")[-2] == "1"]
    assert tested, "no tuned model cleared the validation threshold"
    assert (out / "pairing.csv").is_file()


def test_importance_command(run_config, tmp_path, capsys):
    out = tmp_path / "imp"
    assert main(["sweep", "-c", str(run_config), "-o", str(out)]) == 0
    capsys.readouterr()
    assert main(["importance", "-c", str(run_config), "-o", str(out)]) == 0
    assert "reusing" in capsys.readouterr().out
    lines = (out / "importance.csv").read_text().splitlines()
    assert len(lines) == 1 + 8 * 4  # (6 membranes + 2 PCA targets) x 4 folds
    assert (out / "importance.svg").read_text().startswith("<svg")
