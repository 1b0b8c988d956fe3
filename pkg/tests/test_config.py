import json

import pytest

from raggate.config import ServiceConfig, build_state, load_config
from raggate.corpus import chunk_document
from raggate.encoder import EncoderPair, save_model
from raggate.engine import answer_question
from raggate.index import VectorIndex

from conftest import make_doc


class TestLoadConfig:
    def test_toml(self, tmp_path):
        path = tmp_path / "service.toml"
        path.write_text('threshold = 0.7\nk = 9\nbackend_mode = "stub"\n', encoding="utf-8")
        cfg = load_config(str(path))
        assert cfg.threshold == 0.7
        assert cfg.k == 9

    def test_json(self, tmp_path):
        path = tmp_path / "service.json"
        path.write_text(json.dumps({"port": 9001, "use_web": False}), encoding="utf-8")
        cfg = load_config(str(path))
        assert cfg.port == 9001
        assert cfg.use_web is False

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "service.json"
        path.write_text(json.dumps({"thresold": 0.5}), encoding="utf-8")
        with pytest.raises(ValueError, match="thresold"):
            load_config(str(path))

    def test_unknown_extension_rejected(self, tmp_path):
        path = tmp_path / "service.yaml"
        path.write_text("k: 1", encoding="utf-8")
        with pytest.raises(ValueError):
            load_config(str(path))


class TestBuildState:
    def test_defaults_build_and_answer(self):
        state = build_state(ServiceConfig(use_web=False))
        result = answer_question(state, "anything at all", use_web=False)
        assert result.answer.startswith("STUB-ANSWER|0|")

    def test_loads_model_and_index_from_disk(self, tmp_path):
        enc = EncoderPair.initialize(dim=16, n_features=64, seed=3)
        model_path = tmp_path / "model.bin"
        save_model(enc, str(model_path))
        ix = VectorIndex(16)
        doc = make_doc("d1", "alpha beta gamma.")
        ix.add_chunks([(c, enc.encode_key(c.text)) for c in chunk_document(doc)])
        index_path = tmp_path / "kb.idx"
        ix.save(str(index_path))

        cfg = ServiceConfig(model_path=str(model_path), index_path=str(index_path),
                            use_web=False)
        state = build_state(cfg)
        assert state.encoder.dim == 16
        assert len(state.index) == 1

    def test_dim_mismatch_rejected(self, tmp_path):
        enc = EncoderPair.initialize(dim=16, n_features=64, seed=3)
        ix = VectorIndex(8)
        index_path = tmp_path / "kb.idx"
        ix.save(str(index_path))
        model_path = tmp_path / "model.bin"
        save_model(enc, str(model_path))
        with pytest.raises(ValueError, match="dim"):
            build_state(ServiceConfig(model_path=str(model_path),
                                      index_path=str(index_path)))

    def test_fixture_web_mode_requires_dir(self):
        with pytest.raises(ValueError):
            build_state(ServiceConfig(web_mode="fixture"))

    def test_web_disabled_when_no_client(self):
        state = build_state(ServiceConfig(web_mode="none", use_web=True))
        assert state.gate_config.use_web is False
