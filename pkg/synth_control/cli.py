import sys
from datetime import date
from typing import Optional

import click
from dotenv import load_dotenv
from loguru import logger

from synth_control.errors import SynthControlError
from synth_control.logging.logging import LogLevel, configure_logging
from synth_control.main import (
    fit_synthetic_control,
    generate_panel,
    prepare_study,
    run_leave_one_out,
    run_placebo,
)
from synth_control.patterns import PlaceboMode
from synth_control.settings import get_settings
from synth_control.synthgen.generator import SynthGenParams

CONFIG = click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
OUT_DIR = click.option(
    "--out-dir", default=None, help="Artifact directory (default: SYNTH_DEFAULT_OUT_DIR)"
)
SEED = click.option("--seed", type=int, default=None, help="Override the config seed")


@click.group()
@click.option(
    "--log-level",
    type=click.Choice([level.value for level in LogLevel], case_sensitive=False),
    default=None,
    help="Log level (default: SYNTH_LOG_LEVEL or INFO)",
)
def cli(log_level: Optional[str]):
    """Synthetic control studies on weekly panels."""
    load_dotenv()
    configure_logging(LogLevel(log_level.upper()) if log_level else get_settings().log_level)


@cli.command()
@CONFIG
@OUT_DIR
def prepare(config_path, out_dir):
    """Validate the input CSV and write the prepared weekly panel."""
    prepare_study(config_path, out_dir)


@cli.command()
@CONFIG
@OUT_DIR
@SEED
def fit(config_path, out_dir, seed):
    """Fit the synthetic control of the configured study."""
    fit_synthetic_control(config_path, out_dir, seed)


@cli.command()
@CONFIG
@click.option(
    "--mode",
    type=click.Choice([m.value for m in PlaceboMode]),
    default=PlaceboMode.SPACE.value,
    show_default=True,
)
@click.option(
    "--shift", type=click.IntRange(min=1), default=None, help="In-time shift in weeks"
)
@click.option("--outcome", "outcomes", multiple=True, help="Outcome to swap in (repeatable)")
@click.option("--unit", "units", multiple=True, help="Donor to treat instead (repeatable)")
@OUT_DIR
@SEED
def placebo(config_path, mode, shift, outcomes, units, out_dir, seed):
    """Placebo tests: in space, in time, with another outcome or another treated unit."""
    mode = PlaceboMode(mode)
    names = outcomes if mode is PlaceboMode.OUTCOME else units
    run_placebo(config_path, mode, out_dir, seed, shift, names)


@cli.command()
@CONFIG
@OUT_DIR
@SEED
def loo(config_path, out_dir, seed):
    """Leave each weighted donor out once and check the effect's robustness."""
    run_leave_one_out(config_path, out_dir, seed)


@cli.command()
@click.option("--units", type=int, default=12, show_default=True)
@click.option("--weeks", type=int, default=60, show_default=True)
@click.option("--factors", type=int, default=2, show_default=True)
@click.option("--effect", type=float, default=25.0, show_default=True)
@click.option(
    "--noise",
    type=float,
    default=0.02,
    show_default=True,
    help="Noise sd as a share of the outcome level",
)
@click.option(
    "--treatment-week", type=int, default=None, help="Index of the first treated week"
)
@click.option(
    "--start",
    type=click.DateTime(formats=["%Y-%m-%d"]),
    default="2021-01-03",
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True)
@OUT_DIR
def synthgen(units, weeks, factors, effect, noise, treatment_week, start, seed, out_dir):
    """Generate a factor-model panel with a known effect."""
    params = SynthGenParams(
        units=units,
        weeks=weeks,
        factors=factors,
        effect=effect,
        seed=seed,
        noise=noise,
        treatment_week=treatment_week,
        start=date(start.year, start.month, start.day),
    )
    generate_panel(params, out_dir)


def main(argv=None) -> int:
    """Entry point mapping failures to exit codes: 1 usage, 2 data, 3 optimization."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except SynthControlError as e:
        logger.error(str(e))
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
