import numpy as np
import pytest
import torch

from moveseq_trainer import (
    Classifier,
    MotionTcn,
    NetConfig,
    export_tensors,
    import_tensors,
    read_weights,
    stream_embeddings,
    write_weights,
)

SMALL = NetConfig(input_dim=33, filters=12, kernel_size=3, num_blocks=2, dilations=(1, 2), window=8)


class TestForward:
    def test_shapes_and_nonnegativity(self):
        torch.manual_seed(0)
        model = MotionTcn(SMALL)
        x = torch.randn(4, SMALL.window, SMALL.input_dim, dtype=torch.float64)
        out = model(x)
        assert out.shape == (4, SMALL.filters)
        assert (out >= 0).all()

    def test_causal_padding(self):
        torch.manual_seed(0)
        model = MotionTcn(SMALL)
        x = torch.randn(1, SMALL.window, SMALL.input_dim, dtype=torch.float64)
        y = x.clone()
        y[0, 0] += 10.0  # oldest frame still matters (inside window)
        assert not torch.equal(model(x), model(y))

    def test_stream_embeddings_window_semantics(self, rng):
        torch.manual_seed(1)
        model = MotionTcn(SMALL)
        feats = rng.normal(size=(20, SMALL.input_dim))
        embs = stream_embeddings(model, feats)
        assert embs.shape == (20, SMALL.filters)
        # frame n only sees the last `window` frames
        shifted = feats.copy()
        shifted[0] += 100.0
        embs2 = stream_embeddings(model, shifted)
        assert torch.equal(embs[SMALL.window :], embs2[SMALL.window :])
        assert not torch.equal(embs[0], embs2[0])


class TestExport:
    def test_round_trip_through_file(self, tmp_path):
        torch.manual_seed(2)
        model = MotionTcn(SMALL)
        tensors = export_tensors(model)
        path = tmp_path / "w.json"
        write_weights(SMALL.to_engine_dict(), tensors, path)
        config, back = read_weights(path)
        assert config["input_dim"] == 33 and config["window_w"] == 8
        assert set(back) == set(tensors)
        for name in tensors:
            np.testing.assert_array_equal(back[name], tensors[name])

    def test_expected_layer_names_and_shapes(self):
        torch.manual_seed(3)
        tensors = export_tensors(MotionTcn(SMALL))
        assert tensors["block1.conv1"].shape == (3, 33, 12)
        assert tensors["block1.conv2"].shape == (3, 12, 12)
        assert tensors["block1.residual"].shape == (1, 33, 12)
        assert tensors["block1.skip"].shape == (1, 12, 12)
        assert "block2.residual" not in tensors  # identity: widths match
        assert tensors["block2.skip.bias"].shape == (12,)

    def test_import_inverts_export(self, rng):
        torch.manual_seed(4)
        source = MotionTcn(SMALL)
        torch.manual_seed(5)
        dest = import_tensors(MotionTcn(SMALL), export_tensors(source))
        x = torch.from_numpy(rng.normal(size=(2, SMALL.window, SMALL.input_dim)))
        assert torch.equal(source(x), dest(x))

    def test_non_finite_rejected(self, tmp_path):
        torch.manual_seed(6)
        tensors = export_tensors(MotionTcn(SMALL))
        tensors["block1.conv1"] = tensors["block1.conv1"].copy()
        tensors["block1.conv1"][0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            write_weights(SMALL.to_engine_dict(), tensors, tmp_path / "w.json")


class TestClassifier:
    def test_head_shape(self):
        torch.manual_seed(7)
        model = Classifier(SMALL, n_classes=3)
        x = torch.randn(5, SMALL.window, SMALL.input_dim, dtype=torch.float64)
        assert model(x).shape == (5, 3)
