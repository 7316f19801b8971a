"""
Tests for run configuration, the pydantic models and the output helpers.
"""
import sys
import os
import json
import tempfile
import unittest
from unittest import mock

import numpy as np
from pydantic import ValidationError

# Add the parent directory to the path so we can import from twisting_squeezing
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../..')))

from twisting_squeezing.errors import ConfigError
from twisting_squeezing.models import (
    BlochDirection,
    BlochGrid,
    ChiGaps,
    ControlLaw,
    ControlMode,
    Engine,
    GridSpec,
    RunConfig,
    ScaledMomentState,
    SpinState,
    TwistingTensor,
)
from twisting_squeezing.tools.config_tools import (
    load_run_config,
    log_level_from_env,
    read_config_file,
    resolve_tensor,
)
from twisting_squeezing.tools.grid_tools import default_workers, map_rows, sphere_quadrature
from twisting_squeezing.tools.output_tools import (
    RECORD_COLUMNS,
    check_writable,
    records_to_frame,
    render_json,
    sibling_path,
    write_csv,
    write_json,
    write_outputs,
)
from twisting_squeezing.tools.gaussian_engine import integrate_scaled


class TestModels(unittest.TestCase):

    def test_tensor_is_symmetrized_and_read_only(self):
        tensor = TwistingTensor(chi=[[1.0, 0.2, 0.0], [0.2 + 1e-14, 0.5, 0.0], [0.0, 0.0, 0.1]])
        np.testing.assert_array_equal(tensor.chi, tensor.chi.T)
        with self.assertRaises(ValidationError):
            TwistingTensor(chi=[[1.0, 0.2, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.1]])
        with self.assertRaises(ValueError):
            tensor.chi[0, 0] = 3.0

    def test_tensor_rejects_bad_shapes(self):
        with self.assertRaises(ValidationError):
            TwistingTensor(chi=np.eye(2))
        with self.assertRaises(ValidationError):
            TwistingTensor(chi=np.eye(3), omega=(1.0, 2.0))
        with self.assertRaises(ValidationError):
            TwistingTensor(chi=np.full((3, 3), np.nan))

    def test_tensor_components(self):
        tensor = TwistingTensor.from_components((1.0, 2.0, 3.0, 0.1, 0.2, 0.3))
        self.assertEqual(tensor.components, (1.0, 2.0, 3.0, 0.1, 0.2, 0.3))
        self.assertFalse(tensor.is_diagonal)
        self.assertTrue(TwistingTensor.diagonal(1.0, 0.0, 0.5).is_diagonal)

    def test_bloch_direction(self):
        self.assertAlmostEqual(BlochDirection(theta=1.0, phi=-np.pi / 2).phi, 1.5 * np.pi)
        self.assertTrue(BlochDirection(theta=0.0, phi=2.0).is_pole)
        self.assertTrue(BlochDirection(theta=np.pi).is_pole)
        with self.assertRaises(ValidationError):
            BlochDirection(theta=4.0)
        direction = BlochDirection.from_vector([0.0, 2.0, 0.0])
        self.assertAlmostEqual(direction.theta, np.pi / 2)
        self.assertAlmostEqual(direction.phi, np.pi / 2)
        np.testing.assert_allclose(direction.unit_vector, [0.0, 1.0, 0.0], atol=1e-15)

    def test_spin_state_checks_length_and_norm(self):
        with self.assertRaises(ValidationError):
            SpinState(n_particles=3, amplitudes=[1.0, 0.0])
        with self.assertRaises(ValidationError):
            SpinState(n_particles=1, amplitudes=[1.0, 1.0])

    def test_scaled_state(self):
        state = ScaledMomentState.coherent(-1.0)
        self.assertEqual(state.determinant, 1.0)
        with self.assertRaises(ValidationError):
            ScaledMomentState(v_xx=-1.0, v_yy=1.0)
        with self.assertRaises(ValidationError):
            ScaledMomentState(v_xx=1.0, v_yy=1.0, j=1.5)

    def test_control_law(self):
        self.assertTrue(ControlLaw.fixed((0.0, 0.0, 1.0)).is_static)
        self.assertFalse(ControlLaw.pole_lock().is_static)
        with self.assertRaises(ValidationError):
            ControlLaw(mode=ControlMode.FIXED)
        with self.assertRaises(ValidationError):
            ControlLaw(mode=ControlMode.POLE_LOCK, omega=(1.0, 0.0, 0.0))

    def test_chi_gaps(self):
        gaps = ChiGaps.from_eigenvalues(1.0, 0.0, 0.8)
        self.assertAlmostEqual(gaps.d_chi_x, 0.2)
        self.assertAlmostEqual(gaps.d_chi_y, 0.8)
        self.assertAlmostEqual(gaps.d_chi, 0.8)
        self.assertAlmostEqual(gaps.spread, 1.0)
        with self.assertRaises(ValueError):
            ChiGaps.from_eigenvalues(0.0, 1.0, 0.5)

    def test_grid_spec(self):
        grid = GridSpec.parse("19x36")
        self.assertEqual((grid.n_theta, grid.n_phi), (19, 36))
        self.assertEqual(grid.thetas()[-1], np.pi)
        self.assertAlmostEqual(grid.phis()[-1], 2 * np.pi * 35 / 36)
        for bad in ("19", "axb", "1x36"):
            with self.subTest(bad=bad):
                with self.assertRaises(ValueError):
                    GridSpec.parse(bad)


class TestRunConfig(unittest.TestCase):

    def test_defaults(self):
        config = RunConfig(preset="tact")
        self.assertEqual(config.engine, Engine.GAUSSIAN_SCALED)
        self.assertTrue(config.is_infinite)
        self.assertEqual(config.tau_max, 3.0)
        self.assertEqual(config.dtau, 1e-4)
        self.assertEqual((config.grid.n_theta, config.grid.n_phi), (181, 360))
        self.assertEqual(config.control_law().mode, ControlMode.NONE)

    def test_infinite_particle_words(self):
        for word in ("inf", "Infinity", " infinite "):
            with self.subTest(word=word):
                self.assertIsNone(RunConfig(chi=(1, 0, 0.5), n_particles=word).n_particles)
        self.assertEqual(RunConfig(chi=(1, 0, 0.5), n_particles="40").n_particles, 40)

    def test_exactly_one_tensor_source(self):
        with self.assertRaises(ValidationError):
            RunConfig()
        with self.assertRaises(ValidationError):
            RunConfig(chi=(1, 0, 0), preset="oat")

    def test_engine_constraints(self):
        bad = [
            dict(engine="exact", chi=(1, 0, 0.5)),
            dict(engine="gaussian-full", chi=(1, 0, 0.5)),
            dict(engine="analytic", chi=(1, 0, 0.5), theta0=1.0),
            dict(engine="gaussian-scaled", chi_full=(1, 0, 0.5, 0.1, 0, 0)),
            dict(engine="analytic", chi=(1, 0, 0.5), control="fixed"),
            dict(chi=(1, 0, 0.5), physical_time=True),
            dict(chi=(1, 0, 0.5), unknown_key=1),
            dict(chi=(1, 0, 0.5), n_list=[10, 0]),
            dict(chi=(1, 0, 0.5), theta0=-0.1),
        ]
        for values in bad:
            with self.subTest(values=values):
                with self.assertRaises(ValidationError):
                    RunConfig(**values)
        RunConfig(engine="gaussian-scaled", chi_full=(1, 0, 0.5, 0, 0, 0), theta0=np.pi)
        RunConfig(engine="exact", chi=(1, 0, 0.5), n_particles=10, theta0=1.0)

    def test_fixed_control_law_uses_omega(self):
        config = RunConfig(engine="gaussian-full", n_particles=10, chi=(1, 0, 0), control="fixed",
                           omega=(0.0, 0.0, 2.0))
        self.assertEqual(config.control_law().omega, (0.0, 0.0, 2.0))


class TestConfigLoading(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, name, text):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w", encoding="utf-8") as stream:
            stream.write(text)
        return path

    def test_flags_override_file(self):
        path = self.write("run.json", json.dumps({"preset": "tact", "tau_max": 2.0, "dtau": 0.01}))
        config = load_run_config(path, {"tau_max": 1.0, "stride": None})
        self.assertEqual(config.tau_max, 1.0)
        self.assertEqual(config.dtau, 0.01)
        self.assertEqual(config.stride, 100)

    def test_config_errors(self):
        cases = [
            (self.write("broken.json", "{not json"), {}),
            (self.write("list.json", "[1, 2]"), {}),
            (os.path.join(self.tmp.name, "missing.json"), {}),
            (None, {"chi": [1, 0, 0], "engine": "exact"}),
        ]
        for path, overrides in cases:
            with self.subTest(path=path):
                with self.assertRaises(ConfigError):
                    load_run_config(path, overrides)

    def test_read_config_file(self):
        path = self.write("lmg.json", json.dumps({"lmg": {"omega_big": 1.0, "v_param": 0.5}}))
        self.assertEqual(read_config_file(path)["lmg"]["v_param"], 0.5)

    def test_resolve_tensor_sources(self):
        preset = resolve_tensor(RunConfig(preset="general", omega=(0, 0, 1)))
        np.testing.assert_allclose(preset.chi, np.diag([1.0, 0.0, 0.8]))
        np.testing.assert_allclose(preset.omega, [0.0, 0.0, 1.0])
        full = resolve_tensor(RunConfig(engine="exact", n_particles=4, chi_full=(1, 0, 0, 0.5, 0, 0)))
        self.assertEqual(full.chi[1, 0], 0.5)
        lmg = resolve_tensor(RunConfig(lmg={"omega_big": 1.0, "v_param": 0.5, "w_param": 0.25}))
        np.testing.assert_allclose(lmg.chi, np.diag([0.75, 0.25, 0.0]))
        stages = resolve_tensor(RunConfig(stages=[{"stage": {"gamma_a": 0.25, "gamma_b": 0.25}}]))
        np.testing.assert_allclose(stages.chi, np.diag([0.0, 0.0, 0.5]))

    def test_omega_with_device_source_is_rejected(self):
        with self.assertRaises(ConfigError):
            resolve_tensor(RunConfig(lmg={"omega_big": 1.0}, omega=(1, 0, 0)))

    def test_environment_settings(self):
        with mock.patch.dict(os.environ, {"TWISTING_SQUEEZING_WORKERS": "3",
                                          "TWISTING_SQUEEZING_LOG_LEVEL": "debug"}):
            self.assertEqual(default_workers(), 3)
            self.assertEqual(log_level_from_env(), "DEBUG")
        with mock.patch.dict(os.environ, {"TWISTING_SQUEEZING_LOG_LEVEL": "chatty"}):
            self.assertEqual(log_level_from_env(), "WARNING")


class TestOutputTools(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_records_frame_and_physical_time(self):
        records = integrate_scaled(ScaledMomentState.coherent(), (1.0, 0.0, 0.5), tau_max=1.0, dtau=0.1, stride=5)
        frame = records_to_frame(records)
        self.assertEqual(list(frame.columns), RECORD_COLUMNS)
        self.assertEqual(len(frame), 3)
        physical = records_to_frame(records, n_particles=10)
        self.assertEqual(physical.columns[0], "t")
        self.assertAlmostEqual(physical["t"].iloc[-1], 0.1)

    def test_csv_and_json_are_deterministic(self):
        records = integrate_scaled(ScaledMomentState.coherent(), (1.0, 0.0, 0.8), tau_max=1.0, dtau=0.01, stride=10)
        first = write_csv(records_to_frame(records), os.path.join(self.tmp.name, "a.csv"))
        second = write_csv(records_to_frame(records), os.path.join(self.tmp.name, "nested", "b.csv"))
        with open(first, "rb") as a, open(second, "rb") as b:
            content = a.read()
            self.assertEqual(content, b.read())
        self.assertTrue(content.startswith(b"tau,jx,jy,jz,"))
        self.assertNotIn(b"\r\n", content)

        path = write_json({"b": 1, "a": [1.5]}, os.path.join(self.tmp.name, "s.json"))
        with open(path, encoding="utf-8") as stream:
            self.assertEqual(stream.read(), '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n')
        self.assertEqual(sorted(os.listdir(self.tmp.name)), ["a.csv", "nested", "s.json"])

    def test_write_outputs_is_all_or_nothing(self):
        good = os.path.join(self.tmp.name, "run_energy.csv")
        blocked = os.path.join(self.tmp.name, "run_rate.csv")
        os.mkdir(blocked)
        with self.assertRaises(ConfigError):
            write_outputs([(good, "value\n1\n"), (blocked, "value\n2\n"),
                           (os.path.join(self.tmp.name, "run_summary.json"), render_json({"a": 1}))])
        self.assertEqual(os.listdir(self.tmp.name), ["run_rate.csv"])
        self.assertEqual(os.listdir(blocked), [])

        paths = write_outputs([(good, "value\n1\n"), (os.path.join(self.tmp.name, "run.json"), "{}\n")])
        self.assertEqual([os.path.basename(p) for p in paths], ["run_energy.csv", "run.json"])

    def test_check_writable(self):
        check_writable([os.path.join(self.tmp.name, "new", "deeper", "run.csv")])
        plain = write_json({}, os.path.join(self.tmp.name, "plain.json"))
        for path in (self.tmp.name, os.path.join(plain, "run.csv")):
            with self.subTest(path=path):
                with self.assertRaises(ConfigError):
                    check_writable([path])
        self.assertFalse(os.path.exists(os.path.join(self.tmp.name, "new")))

    def test_sibling_path(self):
        self.assertEqual(sibling_path("out/run.csv", "_rate"), "out/run_rate.csv")
        self.assertEqual(sibling_path("out/run.csv", "_summary", ".json"), "out/run_summary.json")


class TestGridTools(unittest.TestCase):

    def test_map_rows_keeps_order(self):
        self.assertEqual(map_rows(lambda x: x * x, range(20), workers=4), [x * x for x in range(20)])
        self.assertEqual(map_rows(lambda x: -x, [3, 1], workers=1), [-3, -1])

    def test_uniform_density_integrates_to_one(self):
        spec = GridSpec(n_theta=181, n_phi=36)
        values = np.full((181, 36), 1 / (4 * np.pi))
        grid = BlochGrid(label="uniform", theta=spec.thetas(), phi=spec.phis(), values=values)
        self.assertAlmostEqual(sphere_quadrature(grid), 1.0, delta=1e-4)
        frame = grid.to_frame("q")
        self.assertEqual(list(frame.columns), ["theta", "phi", "q"])
        self.assertEqual(len(frame), 181 * 36)


if __name__ == "__main__":
    unittest.main()
