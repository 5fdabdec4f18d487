"""
Main file of the Prior-Saturation Toolkit. Run this script with one of the subcommands
saturation | prior-lift | certify | synthesis | simulate to compute saturation points,
prior-saturation lifts, certificates and optimal syntheses of the fed-batch and MRI models.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-----------------------------------------------
import sys
import logging
import argparse
import warnings
from dataclasses import dataclass, field
import numpy as np
import pandas as pd

# Import functions from other scripts-----------------------
from analysis.models import build_model, mri_admissibility, MODEL_NAMES, ControlModel
from modules.data_handler import DataHandler, read_parameter_file
from modules.exceptions import SaturationToolkitError, InvalidConfig, Unclassified, EXIT_SUCCESS
from modules.planar_system import (Tolerances, singular_feedback, legendre_clebsch_margin, lie_bracket,
                                   alpha_beta)
from modules.shooting import prior_lift_problem, solve_prior_lift
from modules.switching_geometry import (find_saturation_point, continue_switching_curve, certify_tangency,
                                        certify_transversality, certify_prior_saturation_setting)
from modules.synthesis import prepare_synthesis, synthesize_grid, simulate_initial_condition, UNCLASSIFIED
from utils.helpers import parse_grid

# Global variables ---------------------------------------------
logger = logging.getLogger(__name__)
DEFAULT_MODEL = 'fedbatch'
SUBCOMMANDS = ('saturation', 'prior-lift', 'certify', 'synthesis', 'simulate')


# Classes ----------------------------------------------------
@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    params: dict = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    out: str = 'output'
    branch: str | None = None
    grid: tuple[int, int] = (41, 41)
    seed: int = 0
    n_samples: int = 41
    guess: str = 'scan'
    x0: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        return {'command': self.command, 'model': self.model, 'params': self.params,
                'tolerances': self.tolerances.as_dict(), 'branch': self.branch, 'grid': list(self.grid),
                'seed': self.seed, 'n_samples': self.n_samples, 'guess': self.guess,
                'x0': None if self.x0 is None else list(self.x0)}


class App:
    def __init__(self):
        self.parser = build_parser()
        self.data_handler = DataHandler()
        self.commands = {'saturation': self.cmd_saturation,
                         'prior-lift': self.cmd_prior_lift,
                         'certify': self.cmd_certify,
                         'synthesis': self.cmd_synthesis,
                         'simulate': self.cmd_simulate}

    def run(self, argv: list[str] | None = None) -> int:
        """
        Parses the arguments, runs the command and returns the exit code
        """
        args = self.parser.parse_args(argv)
        configure_logging(args.verbose)
        try:
            config = resolve_config(args)
            self.data_handler.reset()
            self.data_handler.set_output_directory(config.out)
            model = build_model(config.model, config.params, config.tolerances)
            self.commands[config.command](config, model)
            self.data_handler.save_all(manifest=config.as_dict() | {'resolved_params': model.params.as_dict()})
        except SaturationToolkitError as e:
            logger.error('%s: %s', type(e).__name__, e)
            return e.exit_code
        return EXIT_SUCCESS

    # Commands ---------------------------------------------------
    def cmd_saturation(self, config: RunConfig, model: ControlModel) -> None:
        """
        Saturation point on the selected locus branch with the sampled feedback and Legendre-Clebsch margin
        """
        locus = model.locus(config.branch)
        tau, x_star = find_saturation_point(model.system, locus)
        taus, points = locus.samples(201)
        rows = []
        for tau_i, x in zip(taus, points):
            try:
                psi = singular_feedback(model.system, x)
            except SaturationToolkitError:
                psi = np.nan
            rows.append([tau_i, x[0], x[1], psi, legendre_clebsch_margin(model.system, x)])
        self.data_handler.add_table('saturation_samples',
                                    pd.DataFrame(rows, columns=['tau', 'x1', 'x2', 'psi', 'lc_margin']))
        self.data_handler.add_document('saturation', {
            'branch': locus.branch, 'tau_star': tau, 'x_star': x_star,
            'psi_residual': singular_feedback(model.system, x_star) - 1,
            'closed_form': model.saturation_point()})
        print(f'x* = ({x_star[0]:.17g}, {x_star[1]:.17g})')

    def cmd_prior_lift(self, config: RunConfig, model: ControlModel) -> None:
        lift = solve_prior_lift(prior_lift_problem(model), config.guess)
        document = lift.as_dict()
        if model.name == 'mri':
            document['admissibility'] = mri_admissibility(model.params, lift.x_e).as_dict()
        self.data_handler.add_document('prior_lift', document)
        print(f'x_e = ({lift.x_e[0]:.17g}, {lift.x_e[1]:.17g}), t_b* = {lift.t_b_star:.17g}')

    def cmd_certify(self, config: RunConfig, model: ControlModel) -> None:
        """
        Lift, switching curve, tangency and transversality certificates, the setting report and a
        seeded spot check of the bracket decomposition
        """
        problem = prior_lift_problem(model)
        lift = solve_prior_lift(problem, config.guess)
        curve = continue_switching_curve(problem, lift, n_samples=config.n_samples)
        tangency = certify_tangency(problem, lift, curve)
        transversality = certify_transversality(problem, lift, curve)
        setting = certify_prior_saturation_setting(model)
        self.data_handler.add_table('switching_curve', curve.to_frame())
        self.data_handler.add_document('certificate', {
            'prior_lift': lift.as_dict(), 'tangency': tangency.as_dict(),
            'transversality': transversality.as_dict(), 'setting': setting.as_dict(),
            'bracket_identity': bracket_spot_check(model, config.seed)})
        print(f'tangent={tangency.tangent} transverse={transversality.transverse} setting={setting.passed}')

    def cmd_synthesis(self, config: RunConfig, model: ControlModel) -> None:
        context = prepare_synthesis(model, config.guess)
        dataset = synthesize_grid(context, config.grid, sink=self.data_handler)
        self.data_handler.add_document('synthesis_info', dataset.info | {'prior_lift': context.lift.as_dict()})
        print(f'{dataset.info["n_classified"]} of {dataset.info["n_nodes"]} nodes classified')

    def cmd_simulate(self, config: RunConfig, model: ControlModel) -> None:
        if config.x0 is None:
            raise InvalidConfig('simulate needs --x0')
        context = prepare_synthesis(model, config.guess, with_curve=model.name == 'fedbatch')
        structure, result = simulate_initial_condition(context, np.array(config.x0))
        if structure == UNCLASSIFIED:
            raise Unclassified(f'No structure described for x0={config.x0}')
        document = {'structure': structure, 'x0': list(config.x0), 'reached_target': True, 'total_time': 0.0}
        if result is not None:
            self.data_handler.add_table('trajectory', result.to_frame())
            document |= {'total_time': result.total_time, 'switch_points': result.switch_points,
                         'reached_target': model.in_target(result.terminal.x),
                         'bridge_conditions': [a.conditions for a in result.arcs if hasattr(a, 'conditions')]}
        self.data_handler.add_document('simulation', document)
        print(f'{structure}: total time {document["total_time"]:.17g}')


# Static functions -------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='prior-saturation',
                                     description='Saturation and prior-saturation analysis of planar '
                                                 'time-optimal control problems')
    parser.add_argument('command', choices=SUBCOMMANDS)
    parser.add_argument('--model', choices=MODEL_NAMES, help='defaults to the model of --params, then fedbatch')
    parser.add_argument('--params', help='JSON model config {"model": ..., "params": {...}, "tolerances": {...}}')
    parser.add_argument('--out', default='output', help='output directory')
    parser.add_argument('--rtol', type=float)
    parser.add_argument('--atol', type=float)
    parser.add_argument('--grid', default='41x41', help='synthesis grid n1xn2')
    parser.add_argument('--branch', help='singular locus branch (fed-batch: vertical; MRI: horizontal, vertical)')
    parser.add_argument('--seed', type=int, default=0, help='seed of the sampled identity checks')
    parser.add_argument('--n-samples', type=int, default=41, help='switching curve samples')
    parser.add_argument('--guess', choices=('scan', 'midpoint'), default='scan')
    parser.add_argument('--x0', help='initial state x1,x2 for simulate')
    parser.add_argument('--verbose', '-v', action='count', default=0)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', force=True)
    logging.captureWarnings(True)
    warnings.simplefilter('default')


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Merges the parameter file and the command line flags into a RunConfig
    """
    file_model, params, tolerance_overrides = None, {}, {}
    if args.params is not None:
        file_model, params, tolerance_overrides = read_parameter_file(args.params)
    model = resolve_model(args.model, file_model)
    for name in ('rtol', 'atol'):
        if getattr(args, name) is not None:
            tolerance_overrides[name] = getattr(args, name)
    x0 = None
    if args.x0 is not None:
        try:
            x0 = tuple(float(v) for v in args.x0.split(','))
        except ValueError:
            x0 = ()
        if len(x0) != 2:
            raise InvalidConfig(f'--x0 must look like 1.0,2.0, got {args.x0!r}')
    try:
        grid = parse_grid(args.grid)
    except ValueError as e:
        raise InvalidConfig(str(e)) from e
    if args.n_samples < 5:
        raise InvalidConfig('--n-samples must be at least 5')
    return RunConfig(command=args.command, model=model, params=params,
                     tolerances=Tolerances.from_dict(tolerance_overrides), out=args.out, branch=args.branch,
                     grid=grid, seed=args.seed, n_samples=args.n_samples, guess=args.guess, x0=x0)


def resolve_model(flag: str | None, file_model: str | None) -> str:
    """
    Model named by --model and by the config file; both may be given when they agree
    """
    if file_model is not None and file_model not in MODEL_NAMES:
        raise InvalidConfig(f'Unknown model {file_model!r} in the config file, expected one of {MODEL_NAMES}')
    if flag is not None and file_model is not None and flag != file_model:
        raise InvalidConfig(f'--model {flag} conflicts with model {file_model!r} of the config file')
    return flag or file_model or DEFAULT_MODEL


def bracket_spot_check(model: ControlModel, seed: int, n_points: int = 100) -> dict:
    """
    Residual of [f, g] = alpha f + beta g at seeded random points of the model's state grid
    """
    rng = np.random.default_rng(seed)
    grid = model.state_grid(20)
    residuals = []
    for x in grid[rng.choice(len(grid), size=min(n_points, len(grid)), replace=False)]:
        try:
            alpha, beta = alpha_beta(model.system, x)
        except SaturationToolkitError:
            continue
        fg = lie_bracket(model.system, 'FG', x)
        residual = fg - alpha * model.system.f(x) - beta * model.system.g(x)
        residuals.append(float(np.linalg.norm(residual) / (1 + np.linalg.norm(fg))))
    return {'seed': seed, 'n_points': len(residuals), 'max_relative_residual': max(residuals, default=0.0)}


# Run code------------------------------------------------------
if __name__ == '__main__':
    sys.exit(App().run())
