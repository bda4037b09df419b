import json
from fractions import Fraction

from gapdim import full_join_family, join_shatter
from gapdim.cli import main
from gapdim.funclass import save_class
from gapdim.shatter import ShatterCertificate

F = Fraction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestDim:
    def test_thresholds_naive(self, capsys):
        code, out = run(
            capsys, "dim", "--class", "thresholds(8)", "--gamma", "1/4",
            "--mode", "naive",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["dimension"] == 1
        assert doc["report"]["certificate"] is not None
        assert doc["version"]

    def test_byte_identical_reruns(self, capsys):
        args = ("dim", "--class", "all_patterns(2)", "--gamma", "2/5")
        _, first = run(capsys, *args)
        _, second = run(capsys, *args)
        assert first == second

    def test_out_dir(self, capsys, tmp_path):
        out_dir = tmp_path / "r"
        code, out = run(
            capsys, "dim", "--class", "thresholds(4)", "--gamma", "1/4",
            "--out", str(out_dir),
        )
        assert code == 0
        assert (out_dir / "report.json").read_text() == out


class TestVerify:
    def test_good_and_tampered(self, capsys, tmp_path):
        FC = full_join_family(1, 1, 3, F(1, 5))
        cert = join_shatter(FC, 1, 3, F(1, 5))
        class_file = tmp_path / "class.json"
        save_class(FC, class_file)
        cert_file = tmp_path / "cert.json"
        cert.save(cert_file)
        code, _ = run(
            capsys, "verify", "--class", str(class_file),
            "--cert", str(cert_file), "--gamma", "1/10",
        )
        assert code == 0

        tampered = ShatterCertificate(cert.points, cert.alpha + F(1, 2), cert.selector)
        tampered.save(cert_file)
        code, out = run(
            capsys, "verify", "--class", str(class_file),
            "--cert", str(cert_file), "--gamma", "1/10",
        )
        assert code == 1
        assert json.loads(out)["report"]["verified"] is False


class TestUsageErrors:
    def test_missing_required_field(self, capsys):
        code, _ = run(capsys, "dim", "--class", "thresholds(4)")
        err = capsys.readouterr()
        assert code == 2

    def test_bad_rational(self, capsys):
        code, _ = run(
            capsys, "dim", "--class", "thresholds(4)", "--gamma", "zebra"
        )
        assert code == 2

    def test_bad_generator(self, capsys):
        code, _ = run(capsys, "dim", "--class", "wat(3)", "--gamma", "1/4")
        assert code == 2

    def test_config_flag_conflict(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"gamma": "1/4"}))
        code, _ = run(
            capsys, "dim", "--class", "thresholds(4)", "--gamma", "1/4",
            "--config", str(cfg),
        )
        assert code == 2

    def test_config_file_supplies_fields(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"gamma": "1/4", "class": "thresholds(4)"}))
        code, out = run(capsys, "dim", "--config", str(cfg))
        assert code == 0
        assert json.loads(out)["report"]["dimension"] == 1


class TestSegmentsJoin:
    def test_segments(self, capsys):
        code, out = run(
            capsys, "segments", "--class", "thresholds(2)", "--gamma", "1/2"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["K"] == 2
        assert len(doc["report"]["functions"]) == 2

    def test_join_full(self, capsys):
        code, out = run(
            capsys, "join", "--class", "full_join_family(1,1,3,1/5)",
            "--gamma", "1/5", "--k", "1", "--kp", "3",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["cell_count"] == 4
        assert doc["report"]["full"] is True


class TestTreeCommands:
    def test_ptree(self, capsys):
        code, out = run(
            capsys, "ptree", "--depth", "3", "--leaves", "0,1,2,3", "--c", "1/2"
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["level"] == 2
        assert doc["report"]["nodes"] == [4, 5]

    def test_itree_build_verify_subtree(self, capsys, tmp_path):
        code, out = run(
            capsys, "itree", "build", "--class", "full_join_family(2,1,3,1/5)",
            "--gamma", "1/5", "--depth", "2",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["status"] == "ok"
        tree_file = tmp_path / "tree.json"
        tree_file.write_text(json.dumps(doc["report"]["tree"]))
        functions = ",".join(str(i) for i in doc["report"]["functions"])

        code, _ = run(
            capsys, "itree", "verify", "--class", "full_join_family(2,1,3,1/5)",
            "--gamma", "1/5", "--tree", str(tree_file), "--functions", functions,
        )
        assert code == 0

        code, out = run(capsys, "subtree", "--tree", str(tree_file), "--K", "5")
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["label"] == [1, 3]
        assert doc["report"]["depth"] >= 1

    def test_itree_build_failure_status(self, capsys, tmp_path):
        from gapdim import Function, FunctionClass
        from gapdim.funclass import save_class as save

        FC = FunctionClass([Function.constant(F(1, 2))], "consts")
        path = tmp_path / "consts.json"
        save(FC, path)
        code, out = run(
            capsys, "itree", "build", "--class", str(path), "--gamma", "1/4",
            "--depth", "1",
        )
        assert code == 0
        assert json.loads(out)["report"]["status"] == "FAILURE"


class TestSimulationCommands:
    def test_discrepancy_csv(self, capsys, tmp_path):
        out_dir = tmp_path / "d"
        code, out = run(
            capsys, "discrepancy", "--class", "thresholds(4)", "--process", "iid",
            "--m", "100", "--seed", "5", "--out", str(out_dir),
        )
        assert code == 0
        csv = (out_dir / "report.csv").read_text().splitlines()
        assert csv[0] == "m,replicate,gamma_m,gamma_m_exact"
        assert len(csv) == 2

    def test_gc_curve(self, capsys):
        code, out = run(
            capsys, "gc-curve", "--class", "thresholds(4)", "--process", "iid",
            "--m-grid", "20,80", "--replicates", "2", "--seed", "3",
        )
        assert code == 0
        doc = json.loads(out)
        assert set(doc["report"]["per_m"]) == {"20", "80"}

    def test_bound_check_pass(self, capsys):
        code, out = run(
            capsys, "bound-check", "--class", "thresholds(8)", "--process", "iid",
            "--gamma", "1/10", "--m", "2000", "--replicates", "2", "--seed", "5",
        )
        assert code == 0
        assert json.loads(out)["report"]["verdict"] == "PASS"

    def test_demo_rotation(self, capsys):
        code, out = run(capsys, "demo-rotation", "--m", "50", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["data_dependent_family"]["gamma_m"]["exact"] == "1/1"
        assert doc["report"]["fixed_family"]["gamma_m"]["exact"] == "0/1"
        assert doc["report"]["combined_dimension"]["dimension"] == 1

    def test_markov_process_file(self, capsys, tmp_path):
        spec = {
            "variant": "markov",
            "transition": [["1/2", "1/2"], ["1/1", "0/1"]],
            "emissions": [
                {"kind": "point", "at": "1/10"},
                {"kind": "uniform", "lo": "1/2", "hi": "9/10"},
            ],
        }
        path = tmp_path / "markov.json"
        path.write_text(json.dumps(spec))
        code, out = run(
            capsys, "discrepancy", "--class", "thresholds(4)",
            "--process", str(path), "--m", "60", "--seed", "9",
        )
        assert code == 0
