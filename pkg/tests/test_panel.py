import unittest
from dataclasses import replace
from datetime import date

import numpy as np

from helpers import START, convex_study, make_panel
from synth_control.errors import (
    ConfigError,
    DuplicateUnit,
    InsufficientDonors,
    InsufficientPreWindow,
    InvalidWindow,
    IrregularWeekSpacing,
    MissingValue,
    TreatedInDonorPool,
    UnknownUnit,
    UnknownVariable,
    UnknownWeek,
)
from synth_control.panel.dataset import PanelDataset, validate_panel, week_range
from synth_control.panel.study import DonorWeights, StudySpec, validate_spec


class TestPanelDataset(unittest.TestCase):
    def setUp(self):
        self.panel = make_panel(
            {
                "price": np.arange(12, dtype=float).reshape(3, 4),
                "volume": np.ones((3, 4)),
            },
            ["BTC", "ETH", "ADA"],
        )

    def test_addressing(self):
        self.assertEqual(self.panel.value("price", "ETH", 2), 6.0)
        self.assertEqual(self.panel.value("price", "ETH", START.isoformat()), 4.0)
        np.testing.assert_array_equal(self.panel.series("price", "ADA"), [8, 9, 10, 11])
        self.assertEqual(self.panel.matrix("price", ["ADA", "BTC"]).shape, (4, 2))

    def test_unknown_coordinates(self):
        with self.assertRaises(UnknownUnit):
            self.panel.series("price", "DOGE")
        with self.assertRaises(UnknownVariable):
            self.panel.series("hodlers", "BTC")
        with self.assertRaises(UnknownWeek):
            self.panel.week_position(date(1999, 1, 1))
        with self.assertRaises(UnknownWeek):
            self.panel.week_position(4)

    def test_values_are_read_only(self):
        with self.assertRaises(ValueError):
            self.panel.values[0, 0, 0] = 1.0

    def test_with_variable_returns_new_panel(self):
        extended = self.panel.with_variable("double", 2 * np.ones((3, 4)))
        self.assertEqual(extended.variables, ("price", "volume", "double"))
        self.assertEqual(self.panel.variables, ("price", "volume"))

    def test_long_frame_round_trip(self):
        frame = self.panel.to_long_frame()
        self.assertEqual(list(frame.columns), ["unit", "date", "variable", "value"])
        self.assertEqual(len(frame), 3 * 4 * 2)
        self.assertEqual(PanelDataset.from_long_frame(frame), self.panel)


class TestValidatePanel(unittest.TestCase):
    def test_valid_panel_is_returned_unchanged(self):
        panel = make_panel({"x": np.ones((2, 3))}, ["a", "b"])
        self.assertIs(validate_panel(panel), panel)

    def test_first_missing_cell_is_reported(self):
        values = np.ones((2, 2, 3))
        values[1, 0, 2] = np.nan
        values[1, 1, 0] = np.nan
        panel = PanelDataset(("a", "b"), tuple(week_range(START, 3)), ("x", "y"), values)
        with self.assertRaises(MissingValue) as ctx:
            validate_panel(panel)
        self.assertEqual(
            (ctx.exception.variable, ctx.exception.unit, ctx.exception.week),
            ("y", "a", "2021-01-17"),
        )

    def test_irregular_spacing(self):
        weeks = (START, date(2021, 1, 10), date(2021, 1, 24))
        panel = PanelDataset(("a",), weeks, ("x",), np.ones((1, 1, 3)))
        with self.assertRaises(IrregularWeekSpacing) as ctx:
            validate_panel(panel)
        self.assertEqual(ctx.exception.gap_days, 14)

    def test_duplicate_unit(self):
        panel = PanelDataset(("a", "a"), (START,), ("x",), np.ones((1, 2, 1)))
        with self.assertRaises(DuplicateUnit):
            validate_panel(panel)


class TestStudySpec(unittest.TestCase):
    def setUp(self):
        self.panel, self.spec = convex_study(seed=0, predictors=3, decoys=2)

    def test_build_defaults(self):
        self.assertEqual(self.spec.donor_units, ("A", "B", "D0", "D1"))
        self.assertEqual(self.spec.pre_window, (0, 19))
        self.assertEqual(self.spec.post_window, (20, 29))
        self.assertIs(validate_spec(self.spec, self.panel), self.spec)

    def test_treated_in_donor_pool(self):
        spec = self.spec.with_donors(["T", "A", "B"])
        with self.assertRaises(TreatedInDonorPool):
            validate_spec(spec, self.panel)

    def test_needs_two_donors(self):
        with self.assertRaises(InsufficientDonors) as ctx:
            validate_spec(self.spec.with_donors(["A"]), self.panel)
        self.assertEqual(ctx.exception.count, 1)

    def test_unknown_predictor(self):
        spec = replace(self.spec, predictor_variables=("p0", "hodlers"))
        with self.assertRaises(UnknownVariable):
            validate_spec(spec, self.panel)

    def test_empty_predictor_set(self):
        with self.assertRaises(ConfigError):
            validate_spec(replace(self.spec, predictor_variables=()), self.panel)

    def test_short_pre_window(self):
        spec = self.spec.with_treatment_week(1)
        with self.assertRaises(InsufficientPreWindow):
            validate_spec(spec, self.panel)

    def test_windows_must_touch_treatment(self):
        spec = replace(self.spec, pre_window=(0, 15))
        with self.assertRaises(InvalidWindow):
            validate_spec(spec, self.panel)

    def test_unknown_treated(self):
        with self.assertRaises(UnknownUnit):
            validate_spec(self.spec.with_treated("ZZZ", ["A", "B"]), self.panel)

    def test_to_dict_renders_weeks(self):
        rendered = self.spec.to_dict(self.panel)
        self.assertEqual(rendered["treatment_week"], "2021-05-23")
        self.assertEqual(rendered["pre_window"], ["2021-01-03", "2021-05-16"])


class TestSimplexWeights(unittest.TestCase):
    def test_must_sum_to_one(self):
        with self.assertRaises(ValueError):
            DonorWeights({"a": 0.5, "b": 0.6})

    def test_must_be_non_negative(self):
        with self.assertRaises(ValueError):
            DonorWeights({"a": -0.2, "b": 1.2})

    def test_nonzero_and_spread(self):
        weights = DonorWeights({"a": 0.5, "b": 0.0, "c": 0.3, "d": 0.2})
        self.assertEqual(list(weights.nonzero()), ["a", "c", "d"])
        self.assertAlmostEqual(weights.spread(), float(np.std([0.5, 0.3, 0.2], ddof=1)))
        np.testing.assert_array_equal(weights.as_array(["d", "a"]), [0.2, 0.5])


if __name__ == "__main__":
    unittest.main()
