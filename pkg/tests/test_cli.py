import numpy as np
import pytest

from texsom.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from texsom.config import format_config, parse_config_text, resolve
from texsom.dataset import load_features, save_features, synth_blobs
from texsom.errors import ConfigError


def run(*argv):
    return main([str(a) for a in argv])


class TestConfig:
    def test_defaults_and_seed_fallback(self):
        cfg = resolve({}, {"seed": 7})
        assert cfg["kmeans_seed"] == cfg["train_seed"] == cfg["cv_seed"] == 7
        assert cfg["sn"] == 6 and cfg["m_blocs"] == 8 and cfg["l_clusters"] == 3

    def test_precedence(self):
        file_values = parse_config_text("epochs=30\nsn=4\n")
        cfg = resolve(file_values, {"epochs": 10})
        assert cfg["epochs"] == 10 and cfg["sn"] == 4

    def test_parsers(self):
        cfg = parse_config_text(
            "orientations=0,1;1,0\nmap_sizes=10x10,15\nsymmetric=false\nradius0=auto # comment\n"
        )
        assert cfg["orientations"] == ((0, 1), (1, 0))
        assert cfg["map_sizes"] == ((10, 10), (15, 15))
        assert cfg["symmetric"] is False and cfg["radius0"] is None

    def test_roundtrip_line(self):
        cfg = resolve({}, {"seed": 3})
        text = "\n".join(format_config(cfg).split(" "))
        assert resolve(parse_config_text(text)) == cfg

    @pytest.mark.parametrize("text", ["nokey", "epochs=abc", "bogus=1", "match_rule=random"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)


class TestSynthCommand:
    def test_shape(self, tmp_path):
        assert run("synth", "--out", tmp_path, "--n-per-class", 100, "--dim", 72) == EXIT_OK
        ds = load_features(tmp_path / "features.csv")
        assert ds.X.shape == (200, 72)

    def test_zero_separation_warns(self, tmp_path, caplog):
        assert run("synth", "--out", tmp_path, "--separation", 0) == EXIT_OK
        assert "separation is 0" in caplog.text

    def test_deterministic(self, tmp_path):
        run("synth", "-o", tmp_path / "a.csv", "--seed", 4)
        run("synth", "-o", tmp_path / "b.csv", "--seed", 4)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestExtractCommand:
    def test_reference_shape(self, tmp_path, pgm_corpus):
        images, labels = pgm_corpus(60, 82, size=40)
        assert run("extract", images, labels, "--out", tmp_path / "o") == EXIT_OK
        ds = load_features(tmp_path / "o" / "features.csv")
        assert ds.X.shape == (142, 72)
        assert ds.class_counts() == {0: 60, 1: 82}

    def test_rerun_identical(self, tmp_path, pgm_corpus):
        images, labels = pgm_corpus(3, 3)
        run("extract", images, labels, "-o", tmp_path / "a.csv", "--seed", 5)
        run("extract", images, labels, "-o", tmp_path / "b.csv", "--seed", 5, "--jobs", 2)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_empty_directory(self, tmp_path):
        (tmp_path / "img").mkdir()
        (tmp_path / "labels.csv").write_text("id,label\n")
        assert run("extract", tmp_path / "img", tmp_path / "labels.csv", "--out", tmp_path / "o") == EXIT_DATA
        assert not (tmp_path / "o" / "features.csv").exists()

    def test_failing_image(self, tmp_path, pgm_corpus, caplog):
        images, labels = pgm_corpus(2, 2)
        (images / "mdb000.pgm").write_bytes(b"P5 2 2 255\n")
        assert run("extract", images, labels, "--out", tmp_path / "o") == EXIT_DATA
        assert "mdb000" in caplog.text
        assert not (tmp_path / "o" / "features.csv").exists()

    def test_missing_inputs(self, tmp_path):
        assert run("extract", tmp_path / "nope", tmp_path / "nope.csv") == EXIT_CONFIG

    def test_bad_config_no_side_effect(self, tmp_path, pgm_corpus):
        images, labels = pgm_corpus(2, 2)
        assert run("extract", images, labels, "--out", tmp_path / "o", "--l-clusters", 20) == EXIT_CONFIG
        assert not (tmp_path / "o").exists()


@pytest.fixture
def blobs_csv(tmp_path):
    p = tmp_path / "blobs.csv"
    save_features(synth_blobs(30, 6, 5.0, 0.5, seed=1), p)
    return p


class TestTrainPredict:
    @pytest.mark.parametrize("model", ["som", "isom"])
    def test_reload_predictions_identical(self, tmp_path, blobs_csv, model):
        assert run("train", blobs_csv, "--model", model, "--rows", 5, "--cols", 5,
                   "--epochs", 20, "--out", tmp_path) == EXIT_OK
        assert run("predict", tmp_path / "model.txt", blobs_csv, "--out", tmp_path) == EXIT_OK
        lines = (tmp_path / "predictions.csv").read_text().splitlines()
        assert lines[0] == "id,predicted,truth"
        assert lines[-1].startswith("# precision=1.000000 recall=1.000000")
        # in-memory reference
        from texsom.features import MinMaxScaler
        from texsom.isom import IsomClassifier
        from texsom.som import SomClassifier, TrainConfig
        ds = load_features(blobs_csv)
        sc = MinMaxScaler().fit(ds.X)
        cls = IsomClassifier if model == "isom" else SomClassifier
        ref = cls(5, 5, TrainConfig(epochs=20)).fit(sc.transform(ds.X), ds.y).predict(sc.transform(ds.X))
        got = [int(l.split(",")[1]) for l in lines[1:-1]]
        assert got == ref.tolist()

    def test_training_log(self, tmp_path, blobs_csv):
        run("train", blobs_csv, "--epochs", 15, "--rows", 5, "--cols", 5, "--out", tmp_path)
        rows = (tmp_path / "model_train_log.csv").read_text().splitlines()
        assert rows[0] == "epoch,quantization_error,weight_updates,counter_increments"
        qe = np.array([float(r.split(",")[1]) for r in rows[1:]])
        assert len(qe) == 15
        # non-increasing trend: last third below first third
        assert qe[-5:].mean() < qe[:5].mean()

    def test_zero_epochs(self, tmp_path, blobs_csv):
        assert run("train", blobs_csv, "--epochs", 0, "--out", tmp_path) == EXIT_CONFIG
        assert not (tmp_path / "model.txt").exists()

    def test_dim_mismatch(self, tmp_path, blobs_csv, caplog):
        run("train", blobs_csv, "--epochs", 2, "--rows", 3, "--cols", 3, "--out", tmp_path)
        other = tmp_path / "other.csv"
        save_features(synth_blobs(5, 4, 1.0, 1.0), other)
        assert run("predict", tmp_path / "model.txt", other, "--out", tmp_path) == EXIT_DATA
        assert "4" in caplog.text and "6" in caplog.text

    def test_empty_features(self, tmp_path, blobs_csv):
        run("train", blobs_csv, "--epochs", 2, "--rows", 3, "--cols", 3, "--out", tmp_path)
        empty = tmp_path / "empty.csv"
        empty.write_text("f0,f1,f2,f3,f4,f5,label,source_id\n")
        assert run("predict", tmp_path / "model.txt", empty, "--out", tmp_path) == EXIT_DATA


class TestCvCommand:
    def test_table_shape(self, tmp_path, blobs_csv):
        assert run("cv", blobs_csv, "--model", "both", "--map-sizes", "4x4,6x6", "--folds", 2,
                   "--epochs", 5, "--out", tmp_path) == EXIT_OK
        lines = (tmp_path / "report.csv").read_text().splitlines()
        assert lines[0] == "map_size,model,precision,recall,fscore,updates"
        assert [l.split(",")[:2] for l in lines[1:]] == [
            ["4x4", "isom"], ["4x4", "som"], ["6x6", "isom"], ["6x6", "som"]
        ]
        assert "per-fold" in (tmp_path / "report.txt").read_text()

    def test_repeatable(self, tmp_path, blobs_csv):
        for d in ("a", "b"):
            run("cv", blobs_csv, "--map-sizes", "4x4", "--folds", 3, "--epochs", 5, "--out", tmp_path / d)
        assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()

    def test_config_file(self, tmp_path, blobs_csv):
        conf = tmp_path / "run.conf"
        conf.write_text("model=som\nmap_sizes=3x3\nfolds=2\nepochs=3\n")
        assert run("cv", blobs_csv, "--config", conf, "--out", tmp_path) == EXIT_OK
        assert (tmp_path / "report.csv").read_text().splitlines()[1].startswith("3x3,som,")

    def test_bad_config_file(self, tmp_path, blobs_csv):
        conf = tmp_path / "run.conf"
        conf.write_text("folds=many\n")
        assert run("cv", blobs_csv, "--config", conf, "--out", tmp_path) == EXIT_CONFIG
