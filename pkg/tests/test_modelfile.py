import json

import numpy as np
import pytest

from aiik.kinematics import builtin_model, forward_kinematics, geometric_jacobian
from aiik.modelfile import ModelLoadError, dumps_model, load_model, model_to_dict, resolve_model, verify_model


@pytest.mark.parametrize("name", ["iiwa14", "planar3r"])
def test_export_and_reload(tmp_path, name):
    model = builtin_model(name)
    path = tmp_path / f"{name}.json"
    path.write_text(dumps_model(model))
    loaded = load_model(path)
    q = np.linspace(-0.5, 0.5, model.n)
    np.testing.assert_array_equal(forward_kinematics(loaded, q).matrix, forward_kinematics(model, q).matrix)
    np.testing.assert_array_equal(geometric_jacobian(loaded, q), geometric_jacobian(model, q))
    assert loaded.task_selector == model.task_selector
    assert loaded.joint_names == model.joint_names
    for key, sb in model.singularities.items():
        np.testing.assert_array_equal(loaded.singularities[key].basis, sb.basis)


def test_resolve_model(tmp_path):
    assert resolve_model("iiwa14").name == "iiwa14"
    with pytest.raises(ModelLoadError):
        resolve_model(str(tmp_path / "missing.json"))


def _write(tmp_path, d):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(d))
    return p


def test_load_errors(tmp_path):
    good = model_to_dict(builtin_model("planar3r"))
    bad_json = tmp_path / "x.json"
    bad_json.write_text("{")
    with pytest.raises(ModelLoadError, match="JSON"):
        load_model(bad_json)
    with pytest.raises(ModelLoadError, match="format"):
        load_model(_write(tmp_path, {**good, "format": "urdf"}))
    with pytest.raises(ModelLoadError, match="version"):
        load_model(_write(tmp_path, {**good, "version": 2}))
    with pytest.raises(ModelLoadError, match="joint_screws"):
        load_model(_write(tmp_path, {**good, "joint_count": 4}))
    with pytest.raises(ModelLoadError):
        load_model(_write(tmp_path, {**good, "joint_screws": [[0, 0, 3, 0, 0, 0]] * 3}))
    sing = dict(good["singularities"]["upright"], basis_dim=2)
    with pytest.raises(ModelLoadError, match="basis_dim"):
        load_model(_write(tmp_path, {**good, "singularities": {"upright": sing}}))


def test_non_orthonormal_basis_rejected(tmp_path):
    d = model_to_dict(builtin_model("planar3r"))
    d["singularities"]["upright"]["basis"] = [[2.0, 0.0, 0.0]]
    with pytest.raises(ModelLoadError, match="orthonormal"):
        load_model(_write(tmp_path, d))


@pytest.mark.parametrize("name", ["iiwa14", "planar3r"])
def test_builtin_models_verify(name):
    checks = verify_model(builtin_model(name))
    assert checks and all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_wrong_basis_fails_verification(tmp_path):
    d = model_to_dict(builtin_model("iiwa14"))
    # moving joints 2 and 4 together leaves both components of the singular set
    h = float(np.sqrt(0.5))
    d["singularities"]["stretched"]["basis"] = [[0, h, 0, h, 0, 0, 0]]
    d["singularities"]["stretched"]["basis_dim"] = 1
    d["singularities"]["stretched"]["component_spaces"] = []
    checks = verify_model(load_model(_write(tmp_path, d)))
    failed = {c.name for c in checks if not c.passed}
    assert "basis motions stay singular" in failed
    # projecting 1e-3 * ones off this basis zeroes x4, so it stays singular too
    assert "transversal perturbation regularizes" in failed
