import hashlib
import json
import pickle

import numpy as np
import pytest
from handcal.hand_model import HandParams, forward, load_model_file

from conftest import official_layout
from mano_convert import SchemaEmitError, UnreadableAsset, convert, convert_dict
from mano_convert.cli import main

TIPS = "0,1,2,3,4"


def tips_of(model):
    return model.fingertip_vertices.tolist()


class TestConvert:
    def test_output_is_schema_valid(self, source_model, asset_path, tmp_path):
        out = tmp_path / "model.json"
        convert(asset_path, tips_of(source_model), out)
        load_model_file(out)  # raises on any schema/invariant violation

    def test_retained_values_match_source(self, source_model, asset_path, tmp_path):
        out = tmp_path / "model.json"
        convert(asset_path, tips_of(source_model), out)
        m = load_model_file(out)
        np.testing.assert_allclose(m.template, source_model.template, atol=1e-9)
        np.testing.assert_allclose(m.shape_dirs, source_model.shape_dirs, atol=1e-9)
        np.testing.assert_allclose(m.pose_dirs, source_model.pose_dirs, atol=1e-9)
        np.testing.assert_allclose(m.joint_regressor, source_model.joint_regressor, atol=1e-9)
        np.testing.assert_allclose(m.skin_weights, source_model.skin_weights, atol=1e-9)
        np.testing.assert_array_equal(m.parents, source_model.parents)
        np.testing.assert_array_equal(m.faces, source_model.faces)

    def test_rest_pose_forward_matches_template(self, source_model, asset_path, tmp_path):
        out = tmp_path / "model.json"
        convert(asset_path, tips_of(source_model), out)
        mesh, _ = forward(load_model_file(out), HandParams.rest())
        np.testing.assert_allclose(mesh.vertices, source_model.template, atol=1e-9)

    def test_dense_regressor_also_accepted(self, source_model, tmp_path):
        path = tmp_path / "dense.pkl"
        with open(path, "wb") as f:
            pickle.dump(official_layout(source_model, sparse_regressor=False), f)
        out = tmp_path / "model.json"
        convert(path, tips_of(source_model), out)
        m = load_model_file(out)
        np.testing.assert_allclose(m.joint_regressor, source_model.joint_regressor, atol=1e-9)

    def test_extra_shape_components_truncated_with_warning(self, source_model, tmp_path):
        path = tmp_path / "wide.pkl"
        with open(path, "wb") as f:
            pickle.dump(official_layout(source_model, n_shape=45), f)
        out = tmp_path / "model.json"
        with pytest.warns(UserWarning, match="45 components"):
            convert(path, tips_of(source_model), out)
        m = load_model_file(out)
        assert m.shape_dirs.shape[0] == 10
        np.testing.assert_allclose(m.shape_dirs, source_model.shape_dirs, atol=1e-9)

    def test_checksum_recorded(self, source_model, asset_path, tmp_path):
        out = tmp_path / "model.json"
        doc = convert(asset_path, tips_of(source_model), out)
        expect = hashlib.sha256(open(asset_path, "rb").read()).hexdigest()
        assert doc["source_sha256"] == expect
        assert json.load(open(out))["source_sha256"] == expect


class TestFailures:
    def test_bad_weight_row_sum_fails_loudly(self, source_model, tmp_path):
        data = official_layout(source_model)
        data["weights"] = data["weights"].copy()
        data["weights"][3] *= 0.5  # would need silent renormalization
        with pytest.raises(SchemaEmitError, match="row 3"):
            convert_dict(data, tips_of(source_model))

    def test_missing_field(self, source_model, tmp_path):
        data = official_layout(source_model)
        del data["posedirs"]
        path = tmp_path / "broken.pkl"
        with open(path, "wb") as f:
            pickle.dump(data, f)
        with pytest.raises(UnreadableAsset, match="posedirs"):
            convert(path, tips_of(source_model), tmp_path / "out.json")

    def test_not_a_pickle(self, tmp_path):
        path = tmp_path / "junk.pkl"
        path.write_bytes(b"this is not a pickle")
        with pytest.raises(UnreadableAsset):
            convert(path, [0, 1, 2, 3, 4], tmp_path / "out.json")

    def test_fingertip_out_of_range(self, source_model, asset_path, tmp_path):
        with pytest.raises(SchemaEmitError, match="out of range"):
            convert(asset_path, [0, 1, 2, 3, 10 ** 6], tmp_path / "out.json")

    def test_too_few_shape_components(self, source_model, tmp_path):
        data = official_layout(source_model)
        data["shapedirs"] = data["shapedirs"][:, :, :4]
        with pytest.raises(UnreadableAsset, match="components"):
            convert_dict(data, tips_of(source_model))


class TestCli:
    def test_end_to_end(self, source_model, asset_path, tmp_path, capsys):
        out = tmp_path / "model.json"
        tips = ",".join(str(i) for i in tips_of(source_model))
        assert main([str(asset_path), "--fingertips", tips, "--out", str(out)]) == 0
        assert "wrote" in capsys.readouterr().out
        load_model_file(out)

    def test_bad_fingertips_exit_1(self, asset_path, tmp_path, capsys):
        code = main([str(asset_path), "--fingertips", "a,b,c",
                     "--out", str(tmp_path / "out.json")])
        assert code == 1
        assert "five integers" in capsys.readouterr().err

    def test_missing_asset_exit_1(self, tmp_path, capsys):
        code = main([str(tmp_path / "nope.pkl"), "--out", str(tmp_path / "out.json")])
        assert code == 1
        assert "error" in capsys.readouterr().err
