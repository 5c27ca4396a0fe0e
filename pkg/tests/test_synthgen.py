import tempfile
import unittest
from pathlib import Path

import numpy as np

from synth_control.engine.fit import fit_study
from synth_control.engine.weights import OptimizerOptions
from synth_control.errors import ConfigError
from synth_control.inference.placebo import placebo_in_time
from synth_control.panel.dataset import PanelDataset, validate_panel
from synth_control.panel.study import StudySpec
from synth_control.report.config import load_config
from synth_control.synthgen import SynthGenParams, generate, write_synthgen

FAST = OptimizerOptions(n_starts=4, lattice_budget=32, n_refine=2, max_iter=150)
SEEDS = range(10)


def _study(params: SynthGenParams):
    frame, truth = generate(params)
    panel = validate_panel(PanelDataset.from_long_frame(frame))
    spec = StudySpec.build(
        panel,
        treated_unit=truth.treated_unit,
        treatment_week=truth.treatment_index,
        outcome_variable=truth.outcome_variable,
        predictor_variables=truth.predictors,
    )
    return panel, spec, truth


class TestSynthGenParams(unittest.TestCase):
    def test_defaults(self):
        params = SynthGenParams()
        self.assertEqual(params.t0, 40)
        self.assertEqual(params.predictors, ("x1", "x2", "x3"))
        self.assertEqual(params.donors[0], "donor_01")
        self.assertEqual(len(params.donors), 11)

    def test_rejects_bad_shapes(self):
        for bad in (
            dict(units=2),
            dict(weeks=5),
            dict(factors=0),
            dict(noise=-0.1),
            dict(treatment_week=1),
            dict(treatment_week=60),
        ):
            with self.subTest(**bad), self.assertRaises(ConfigError):
                SynthGenParams(**bad)


class TestGenerate(unittest.TestCase):
    def test_shape_and_truth(self):
        params = SynthGenParams(units=5, weeks=20, factors=2, seed=3)
        frame, truth = generate(params)
        self.assertEqual(list(frame.columns), ["unit", "date", "variable", "value"])
        self.assertEqual(len(frame), 5 * 20 * 4)
        self.assertEqual(truth.treatment_index, 13)
        self.assertAlmostEqual(sum(truth.donor_mix.values()), 1.0)
        self.assertEqual(truth.noise_sd, 2.0)

    def test_same_seed_same_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            params = SynthGenParams(units=6, weeks=24, seed=9)
            first, _ = write_synthgen(params, Path(tmp) / "a")
            second, _ = write_synthgen(params, Path(tmp) / "b")
            self.assertEqual(first.read_bytes(), second.read_bytes())
            other, _ = write_synthgen(SynthGenParams(units=6, weeks=24, seed=10), Path(tmp) / "c")
            self.assertNotEqual(first.read_bytes(), other.read_bytes())

    def test_written_config_loads(self):
        with tempfile.TemporaryDirectory() as tmp:
            write_synthgen(SynthGenParams(units=5, weeks=30), tmp)
            config = load_config(Path(tmp) / "study.toml")
            self.assertEqual(config.study.treated_unit, "treated")
            self.assertEqual(config.resolve_input(Path(tmp)), Path(tmp) / "observations.csv")
            self.assertTrue((Path(tmp) / "truth.json").exists())


class TestEffectRecovery(unittest.TestCase):
    def test_injected_effect_is_recovered(self):
        estimates = []
        for seed in SEEDS:
            panel, spec, _ = _study(SynthGenParams(effect=25.0, seed=seed))
            estimates.append(fit_study(panel, spec, FAST).average_post_gap)
        self.assertAlmostEqual(float(np.mean(estimates)), 25.0, delta=0.2 * 25.0)

    def test_null_effect_and_in_time_placebo(self):
        estimates, passed = [], 0
        for seed in SEEDS:
            panel, spec, _ = _study(SynthGenParams(effect=0.0, seed=seed))
            estimates.append(fit_study(panel, spec, FAST).average_post_gap)
            _, verdict = placebo_in_time(panel, spec, shift_weeks=12, options=FAST)
            passed += verdict.passed
        self.assertLess(abs(float(np.mean(estimates))), 3.0)
        self.assertGreaterEqual(passed, 8)


if __name__ == "__main__":
    unittest.main()
