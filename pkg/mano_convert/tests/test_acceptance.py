"""Converter acceptance: one criterion, one PASS/FAIL line (run with -s)."""

import numpy as np
from handcal.hand_model import HandParams, forward, load_model_file

from mano_convert import convert


def test_converter_acceptance(source_model, asset_path, tmp_path):
    out = tmp_path / "model.json"
    convert(asset_path, source_model.fingertip_vertices.tolist(), out)
    model = load_model_file(out)  # schema-valid or this raises

    worst = max(
        np.abs(model.template - source_model.template).max(),
        np.abs(model.shape_dirs - source_model.shape_dirs).max(),
        np.abs(model.pose_dirs - source_model.pose_dirs).max(),
        np.abs(model.joint_regressor - source_model.joint_regressor).max(),
        np.abs(model.skin_weights - source_model.skin_weights).max(),
    )
    mesh, _ = forward(model, HandParams.rest())
    e_rest = np.abs(mesh.vertices - source_model.template).max()

    ok = worst <= 1e-9 and e_rest <= 1e-9
    line = (f"{'PASS' if ok else 'FAIL'}  converter: schema-valid output, "
            f"values match source<=1e-9, rest-pose identity<=1e-9 "
            f"(worst={worst:.1e} rest={e_rest:.1e})")
    print(line)
    assert ok, line
