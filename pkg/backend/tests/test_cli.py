import json

import pytest

from alignbert.cli import main

from conftest import write_squad


@pytest.fixture(scope="module")
def squad_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "train.json"
    return write_squad(path, [
        ("c1", "deta", "bata deko", "deko", 5),
        ("c2", "mefa", "bata deko", None, None),
    ])


class TestMakeEncoder:
    def test_trains_vocab_and_writes_artifact(self, tmp_path, capsys):
        texts = tmp_path / "texts.txt"
        texts.write_text("bata deko gani\ndeko bata\n", encoding="utf-8")
        out = tmp_path / "enc"
        rc = main(["make-encoder", str(texts), "--out", str(out),
                   "--vocab-size", "50", "--hidden", "32", "--layers", "1",
                   "--heads", "2", "--intermediate", "64",
                   "--mlm-steps", "5", "--pointer-steps", "3",
                   "--batch-size", "2"])
        assert rc == 0
        assert "encoder written" in capsys.readouterr().out
        expected = {"config.json", "model.safetensors", "tokenizer.json",
                    "pretrain_log.json"}
        assert expected <= {p.name for p in out.iterdir()}

    def test_empty_text_file_fails_with_json_error(self, tmp_path, capsys):
        texts = tmp_path / "texts.txt"
        texts.write_text("  \n\n", encoding="utf-8")
        rc = main(["make-encoder", str(texts), "--out", str(tmp_path / "enc"),
                   "--mlm-steps", "1", "--pointer-steps", "1"])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "BackendError"
        assert "nonempty" in payload["message"]


class TestFinetuneAndPredict:
    def test_full_cli_cycle_honors_config_file(self, tiny_encoder, squad_file,
                                               tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"batch_size": 2, "learning_rate": 1e-4,
                                   "num_epochs": 1}), encoding="utf-8")
        model = tmp_path / "model"
        rc = main(["finetune", str(squad_file), "--encoder", str(tiny_encoder),
                   "--out", str(model), "--config", str(cfg)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "trained on 2 examples" in out
        saved = json.loads((model / "finetune_config.json").read_text(encoding="utf-8"))
        assert saved["batch_size"] == 2
        assert saved["num_epochs"] == 1

        pred = tmp_path / "pred.ndjson"
        rc = main(["predict", str(squad_file), "--model", str(model),
                   "--out", str(pred), "--nbest", "2"])
        assert rc == 0
        assert "2 predictions written" in capsys.readouterr().out
        lines = [json.loads(line) for line in
                 pred.read_text(encoding="utf-8").splitlines()]
        assert [p["id"] for p in lines] == ["c1", "c2"]
        assert all(len(p["nbest"]) <= 2 for p in lines)

    def test_finetune_rejects_bad_config_with_json_error(self, tiny_encoder,
                                                         squad_file, tmp_path,
                                                         capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"batch_size": 0}', encoding="utf-8")
        rc = main(["finetune", str(squad_file), "--encoder", str(tiny_encoder),
                   "--out", str(tmp_path / "m"), "--config", str(cfg)])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "BackendError"
        assert "batch_size" in payload["message"]

    def test_predict_missing_model_dir_fails_cleanly(self, squad_file, tmp_path,
                                                     capsys):
        rc = main(["predict", str(squad_file), "--model",
                   str(tmp_path / "nowhere"), "--out", str(tmp_path / "p")])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"]
        assert payload["message"]

    def test_malformed_squad_fails_with_json_error(self, tiny_encoder, tmp_path,
                                                   capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"data": "nope"}', encoding="utf-8")
        rc = main(["finetune", str(bad), "--encoder", str(tiny_encoder),
                   "--out", str(tmp_path / "m")])
        assert rc == 1
        payload = json.loads(capsys.readouterr().err)
        assert payload["error"] == "BackendError"
        assert "not a SQuAD document" in payload["message"]