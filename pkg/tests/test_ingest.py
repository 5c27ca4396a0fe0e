import tempfile
import unittest
from datetime import date
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_panel
from synth_control.errors import (
    EmptyInput,
    MissingValue,
    NegativeValue,
    NonPositiveBaselinePrice,
    NonPositiveMaximum,
    ParseError,
)
from synth_control.ingest.csv_reader import LongCsvReader, load_long_csv
from synth_control.ingest.observation import LongObservation
from synth_control.ingest.screening import (
    screen_predictors,
    screen_predictors_with_decisions,
)
from synth_control.ingest.transforms import (
    WALLET_INVESTMENT,
    add_transformed,
    add_wallet_value,
    log_transform,
    normalize_max,
    wallet_value,
)
from synth_control.ingest.weekly import to_weekly, week_start
from synth_control.patterns import Aggregation, VariableTransform, WeekAnchor


class TestLongCsvReader(unittest.TestCase):
    def setUp(self):
        self.reader = LongCsvReader()

    def test_reads_rows_in_order(self):
        raw = b"unit,date,variable,value\nBTC,2024-04-14,price,63000.5\nETH,2024-04-14,price,3100\n"
        observations = self.reader.read(raw)
        self.assertEqual(
            observations[0], LongObservation("BTC", date(2024, 4, 14), "price", 63000.5)
        )
        self.assertEqual(observations[1].unit, "ETH")

    def test_quoted_fields(self):
        raw = b'unit,date,variable,value\n"Wrapped, BTC",2024-04-14,price,1\n'
        self.assertEqual(self.reader.read(raw)[0].unit, "Wrapped, BTC")

    def test_bad_date_names_the_line(self):
        raw = b"unit,date,variable,value\nBTC,2024-04-14,price,1\nBTC,14/04/2024,price,2\n"
        with self.assertRaises(ParseError) as ctx:
            self.reader.read(raw)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, "date"))

    def test_bad_value(self):
        raw = b"unit,date,variable,value\nBTC,2024-04-14,price,n/a\n"
        with self.assertRaises(ParseError) as ctx:
            self.reader.read(raw)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (2, "value"))

    def test_wrong_header(self):
        with self.assertRaises(ParseError) as ctx:
            self.reader.read(b"coin,date,variable,value\nBTC,2024-04-14,price,1\n")
        self.assertEqual(ctx.exception.line, 1)

    def test_load_from_path(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "obs.csv"
            path.write_text("unit,date,variable,value\nBTC,2024-04-14,price,2\n", encoding="utf-8")
            self.assertEqual(load_long_csv(path)[0].value, 2.0)
            self.assertEqual(load_long_csv(str(path))[0].unit, "BTC")

    def test_empty_input(self):
        with self.assertRaises(EmptyInput):
            self.reader.read(b"")
        with self.assertRaises(EmptyInput):
            self.reader.read(b"unit,date,variable,value\n")


def _obs(day, value, unit="a", variable="x"):
    return LongObservation(unit, date.fromisoformat(day), variable, value)


class TestToWeekly(unittest.TestCase):
    def setUp(self):
        self.observations = [
            _obs("2021-01-03", 1.0),
            _obs("2021-01-05", 3.0),
            _obs("2021-01-10", 5.0),
        ]

    def test_week_start(self):
        self.assertEqual(week_start(date(2021, 1, 5), WeekAnchor.SUNDAY), date(2021, 1, 3))
        self.assertEqual(week_start(date(2021, 1, 3), WeekAnchor.MONDAY), date(2020, 12, 28))

    def test_mean_buckets_from_sunday(self):
        panel = to_weekly(self.observations)
        self.assertEqual(panel.week_index, (date(2021, 1, 3), date(2021, 1, 10)))
        np.testing.assert_array_equal(panel.series("x", "a"), [2.0, 5.0])

    def test_last_aggregation(self):
        panel = to_weekly(self.observations, aggregation=Aggregation.LAST)
        np.testing.assert_array_equal(panel.series("x", "a"), [3.0, 5.0])

    def test_monday_anchor(self):
        panel = to_weekly(self.observations, week_anchor=WeekAnchor.MONDAY)
        self.assertEqual(panel.week_index, (date(2020, 12, 28), date(2021, 1, 4)))
        np.testing.assert_array_equal(panel.series("x", "a"), [1.0, 4.0])

    def test_missing_week_is_reported(self):
        observations = [_obs("2021-01-03", 1.0), _obs("2021-01-17", 2.0)]
        with self.assertRaises(MissingValue) as ctx:
            to_weekly(observations)
        self.assertEqual(ctx.exception.week, "2021-01-10")

    def test_unit_missing_a_variable(self):
        observations = self.observations + [_obs("2021-01-03", 7.0, unit="b")]
        with self.assertRaises(MissingValue) as ctx:
            to_weekly(observations)
        self.assertEqual((ctx.exception.unit, ctx.exception.week), ("b", "2021-01-10"))

    def test_without_validation_keeps_gaps(self):
        observations = [_obs("2021-01-03", 1.0), _obs("2021-01-17", 2.0)]
        panel = to_weekly(observations, validate=False)
        self.assertEqual(panel.incomplete_variables(), ["x"])


class TestTransforms(unittest.TestCase):
    def test_wallet_value_baseline_is_exactly_100(self):
        values = wallet_value([50.0, 61.3, 70.1], baseline_week=1)
        self.assertEqual(values[1], WALLET_INVESTMENT)
        self.assertAlmostEqual(values[0], 100 * 50.0 / 61.3)

    @given(
        prices=st.lists(
            st.floats(min_value=1e-3, max_value=1e6), min_size=2, max_size=40
        ),
        scale=st.floats(min_value=1e-3, max_value=1e3),
        data=st.data(),
    )
    @settings(max_examples=100, deadline=None)
    def test_wallet_value_is_scale_invariant(self, prices, scale, data):
        baseline = data.draw(st.integers(min_value=0, max_value=len(prices) - 1))
        plain = wallet_value(prices, baseline)
        scaled = wallet_value(np.array(prices) * scale, baseline)
        self.assertEqual(plain[baseline], 100.0)
        self.assertEqual(scaled[baseline], 100.0)
        np.testing.assert_allclose(scaled, plain, rtol=1e-9)

    def test_wallet_value_errors(self):
        with self.assertRaises(NonPositiveBaselinePrice):
            wallet_value([0.0, 1.0], baseline_week=0)
        with self.assertRaises(NegativeValue):
            wallet_value([1.0, -1.0], baseline_week=0)

    def test_normalize_max(self):
        np.testing.assert_array_equal(normalize_max([1.0, 4.0, 2.0]), [0.25, 1.0, 0.5])
        with self.assertRaises(NonPositiveMaximum):
            normalize_max([0.0, 0.0])

    def test_log_floor(self):
        np.testing.assert_allclose(log_transform([0.0, np.e], floor=1e-9), [np.log(1e-9), 1.0])

    def test_panel_transforms(self):
        panel = make_panel({"price": np.array([[2.0, 4.0, 8.0], [1.0, 1.0, 3.0]])}, ["a", "b"])
        panel = add_wallet_value(panel, "price", baseline_week=1)
        np.testing.assert_allclose(panel.series("wallet_value", "a"), [50.0, 100.0, 200.0])
        np.testing.assert_allclose(panel.series("wallet_value", "b"), [100.0, 100.0, 300.0])

        panel = add_transformed(panel, "price", VariableTransform.NORMALIZE_MAX)
        np.testing.assert_allclose(panel.series("price_normalized", "b"), [1 / 3, 1 / 3, 1.0])
        panel = add_transformed(panel, "price", VariableTransform.LOG)
        self.assertIn("log_price", panel.variables)

    def test_panel_wallet_value_names_the_unit(self):
        panel = make_panel({"price": np.array([[2.0, 4.0], [0.0, 1.0]])}, ["a", "b"])
        with self.assertRaises(NonPositiveBaselinePrice) as ctx:
            add_wallet_value(panel, "price")
        self.assertEqual(ctx.exception.unit, "b")


class TestScreening(unittest.TestCase):
    def setUp(self):
        a = np.arange(1.0, 9.0)
        self.panel = make_panel(
            {
                "a": np.vstack([a, a]),
                "b": np.vstack([a**2, a]),
                "c": np.vstack([[1.0, -1.0] * 4, a]),
                "d": np.vstack([np.full(8, 3.0), a]),
            },
            ["T", "U"],
        )

    def test_greedy_screen(self):
        kept, decisions = screen_predictors_with_decisions(
            self.panel, ["a", "b", "c", "d"], 0.7, "T", (0, 5)
        )
        self.assertEqual(kept, ["a", "c"])
        by_name = {d.variable: d for d in decisions}
        self.assertEqual(by_name["b"].reason, "correlated")
        self.assertEqual(by_name["b"].correlated_with, "a")
        self.assertGreater(by_name["b"].max_abs_correlation, 0.9)
        self.assertEqual(by_name["d"].reason, "constant")

    def test_order_matters(self):
        kept = screen_predictors(self.panel, ["b", "a", "c"], 0.7, "T", (0, 5))
        self.assertEqual(kept, ["b", "c"])

    def test_threshold_one_keeps_every_varying_series(self):
        kept, _ = screen_predictors_with_decisions(
            self.panel, ["a", "b", "c", "d"], 1.0, "T", (0, 5)
        )
        self.assertEqual(kept, ["a", "b", "c"])


if __name__ == "__main__":
    unittest.main()
