"""
Batch front end.

    python cli.py decompose presets/a1_sign_action.json --out data/reports
    python cli.py run presets/x4.json kstab
    python cli.py verify data/reports/kstab.json
    python cli.py suite presets/suite.json

Exit codes: 0 success, 1 computation failure, 2 parse error, 3 validation error.
Logs go to stderr; stdout only carries deterministic output.
"""
import json
import logging
import os
import sys
from typing import List, Optional

import click

from config import Config
from services.certificates import verify_report
from services.errors import MFGError, ParseError, ValidationError
from services.report_store import ReportStore, load_report_file, render_text
from services.suite import SuiteCounts, run_suite, write_suite
from services.task_runner import (
    RunOptions, build_workspace, load_problem, run_tasks, select_tasks
)

logger = logging.getLogger('mfg.cli')

EXIT_OK, EXIT_COMPUTATION, EXIT_PARSE, EXIT_VALIDATION = 0, 1, 2, 3


def exit_code_for(error: MFGError) -> int:
    if isinstance(error, ParseError):
        return EXIT_PARSE
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    return EXIT_COMPUTATION


def _fail(error: MFGError):
    click.echo(json.dumps(error.to_dict(), sort_keys=True), err=True)
    sys.exit(exit_code_for(error))


def run_options(fn):
    """--seed, --degree-bound, --max-steps, --out and --parallel."""
    options = [
        click.option('--seed', type=int, default=None, help='Seed for randomized choices (overrides the config).'),
        click.option('--degree-bound', type=click.IntRange(min=0), default=None,
                     help='Degree window above the top generator for syzygies (0 = automatic).'),
        click.option('--max-steps', type=click.IntRange(min=1), default=None,
                     help='Maximum resolution length when looking for periodicity.'),
        click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
                     help=f'Report directory (default {Config.MFG_REPORT_DIR}).'),
        click.option('--parallel', is_flag=True, help='Run independent tasks on a thread pool.'),
        click.option('--text', is_flag=True, help='Also print a plain-text rendering of each report.'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _execute(config_path: str, op: Optional[str], task_name: Optional[str], seed, degree_bound, max_steps,
             out_dir, parallel, text):
    try:
        problem = load_problem(config_path)
        ws = build_workspace(problem)
        names = select_tasks(ws, op, task_name)
    except MFGError as e:
        _fail(e)

    opts = RunOptions(seed=seed, degree_bound=degree_bound, max_steps=max_steps, parallel=parallel)
    outcomes = run_tasks(ws, names, opts)
    failed = [o for o in outcomes if not o.ok]
    if failed:
        # no partial output: reports are written only when every task succeeded
        for outcome in failed:
            click.echo(json.dumps({'task': outcome.task, **outcome.error.to_dict()}, sort_keys=True), err=True)
        sys.exit(max(exit_code_for(o.error) for o in failed))

    store = ReportStore(out_dir)
    for outcome in outcomes:
        path = store.save(outcome.report)
        click.echo(f"{outcome.task}: {path}")
        if text:
            click.echo(render_text(outcome.report))
    sys.exit(EXIT_OK)


@click.group()
@click.option('-v', '--verbose', is_flag=True, help='Log algorithm steps (DEBUG).')
def cli(verbose):
    """Equivariant matrix factorization toolkit."""
    logging.basicConfig(
        level=logging.DEBUG if verbose or Config.DEV_DEBUG else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )


@cli.command()
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.argument('task_name')
@run_options
def run(config_path, task_name, **kwargs):
    """Run the task TASK_NAME of a problem config."""
    _execute(config_path, None, task_name, **kwargs)


def _op_command(op: str, help_text: str):
    @click.argument('config_path', type=click.Path(dir_okay=False))
    @click.option('--task', 'task_name', default=None, help=f'Run only this {op} task.')
    @run_options
    def command(config_path, task_name, **kwargs):
        _execute(config_path, op, task_name, **kwargs)

    command.__doc__ = help_text
    cli.command(name=op)(command)


_op_command('validate', 'Validate the problem and certify every declared object.')
_op_command('decompose', 'Krull-Schmidt decomposition into indecomposables.')
_op_command('split-idempotent', 'Split a strict or homotopy idempotent.')
_op_command('stable-hom', 'Basis of the stable Hom space between two objects.')
_op_command('kstab', 'Factorization from the periodic resolution of the residue field.')
_op_command('induce', 'Induce a forgotten object and decompose it.')
_op_command('strictify', 'Strictify a homotopy-equivariant object.')
_op_command('base-change', 'Base change along a graded ring map.')


@cli.command()
@click.argument('report_path', type=click.Path(dir_okay=False))
def verify(report_path):
    """Re-check every certificate in a report file."""
    try:
        if not os.path.exists(report_path):
            raise ParseError(f"Report {report_path} does not exist")
        result = verify_report(load_report_file(report_path))
    except MFGError as e:
        _fail(e)
    click.echo(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    sys.exit(EXIT_OK if result.ok else EXIT_COMPUTATION)


@cli.command()
@click.argument('config_path', type=click.Path(dir_okay=False), required=False)
@click.option('--seed', type=int, default=None, help='Suite seed (overrides the config).')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
              help='Report directory; suite reports go to <out>/suite.')
@click.option('--only', multiple=True, help='Run only the named criterion (repeatable).')
def suite(config_path, seed, out_dir, only):
    """Run the acceptance corpus, writing one certified report per sample."""
    try:
        counts, config_seed = SuiteCounts(), None
        if config_path:
            problem = load_problem(config_path)
            counts, config_seed = SuiteCounts.from_dict(problem.suite), problem.seed
        result = run_suite(counts, seed if seed is not None else config_seed, list(only) or None)
    except MFGError as e:
        _fail(e)
    paths: List[str] = write_suite(result, os.path.join(out_dir or Config.MFG_REPORT_DIR, 'suite'))
    for criterion in result.criteria:
        status = 'PASS' if criterion.passed else 'FAIL'
        click.echo(f"{status} {criterion.name}: {criterion.checked} checks")
        for failure in criterion.failures:
            click.echo(f"    {failure}")
    click.echo(f"{len(paths)} files written")
    sys.exit(EXIT_OK if result.passed else EXIT_COMPUTATION)


if __name__ == '__main__':
    cli()
