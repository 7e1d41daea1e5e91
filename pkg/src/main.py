"""
Command-line entry point of the condbell toolkit.

Subcommands: exact, simulate, analyze, realizable, maximize, power.
Reports go to stdout (or --report); logs and diagnostics go to stderr.
Exit codes: 0 success, 2 input error, 3 internal error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.config import get_config
from src.data_preparation.response_processor import ResponseProcessor
from src.models.agents import dump_agent, load_agent
from src.models.classical import realize
from src.models.probability import ConditionalTriple, cond_bell_delta
from src.models.protocol import ProtocolResult
from src.models.quantum import maximize_violation
from src.services import InferenceService, ProtocolService, ReportService
from src.utils import FileManager, get_logger
from src.utils.exceptions import CondBellError, UnknownSubcommand, UsageError
from src.utils.logger import set_console_level

COMMANDS = ('exact', 'simulate', 'analyze', 'realizable', 'maximize', 'power')


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad usage."""

    def error(self, message):
        if 'invalid choice' in message:
            raise UnknownSubcommand(f"{message}; expected one of {', '.join(COMMANDS)}")
        raise UsageError(f"{message} (usage: {' '.join(self.format_usage().split())})")


def build_parser() -> argparse.ArgumentParser:
    """Parse command line arguments."""
    config = get_config()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['text', 'json'], default=config.get('report_format'),
                        help='Report format (default: text)')
    common.add_argument('--report', type=str, help='Also write the report to this file')
    common.add_argument('--debug', action='store_true', help='Show debug logs on stderr')
    common.add_argument('--quiet', action='store_true', help='Only show warnings on stderr')

    parser = _Parser(prog='condbell', description='Conditional-probability Bell test toolkit')
    commands = parser.add_subparsers(dest='command', metavar='command', required=True)

    exact = commands.add_parser('exact', parents=[common], help='Exact conditionals and delta of a model')
    exact.add_argument('--model', required=True, help='Model JSON (classical, quantum or table)')

    simulate = commands.add_parser('simulate', parents=[common], help='Simulate the splitting protocol')
    simulate.add_argument('--model', required=True, help='Model JSON')
    simulate.add_argument('--n', type=int, required=True, help='Ensemble size (even, >= 4)')
    simulate.add_argument('--seed', type=int, required=True, help='64-bit seed')
    simulate.add_argument('--out', required=True, help='ProtocolResult JSON output')
    simulate.add_argument('--csv', help='Per-subject response CSV output')

    analyze = commands.add_parser('analyze', parents=[common], help='Test response data for quantum-likeness')
    analyze.add_argument('--data', required=True, help='Response CSV or ProtocolResult JSON')
    analyze.add_argument('--delta', type=float, default=config.get('delta_threshold'), help='Threshold delta')
    analyze.add_argument('--alpha', type=float, default=config.get('alpha'), help='Significance level')
    analyze.add_argument('--confidence', type=float, default=config.get('confidence'),
                         help='Confidence p for the delta bound')
    analyze.add_argument('--method', choices=['z', 'chi2', 'z_test', 'chi2_fit'],
                         default=config.get('test_method'), help='Test method')
    analyze.add_argument('--seed', type=int, help='Seed to record for CSV input')

    realizable = commands.add_parser('realizable', parents=[common], help='Decide realizability of a triple')
    realizable.add_argument('--triple', required=True, help='ConditionalTriple JSON')

    maximize = commands.add_parser('maximize', parents=[common], help='Search the maximal qubit violation')
    maximize.add_argument('--grid-step', type=float, default=config.get('grid_step'), help='Grid step (degrees)')
    maximize.add_argument('--refine', type=int, default=config.get('refine_iterations'),
                          help='Refinement iterations')

    power = commands.add_parser('power', parents=[common], help='Per-branch sample size')
    power.add_argument('--target-delta', type=float, required=True, help='Delta to detect, in (0, 1]')
    power.add_argument('--alpha', type=float, default=config.get('alpha'), help='Significance level')
    power.add_argument('--power', type=float, default=0.9, help='Desired power')
    power.add_argument('--verify', action='store_true', help='Check the size by Monte Carlo')
    power.add_argument('--replications', type=int, default=config.get('monte_carlo_replications'))
    power.add_argument('--seed', type=int, default=config.get('monte_carlo_seed'))
    return parser


class CommandRunner:
    """Runs one parsed subcommand and returns (payload, seed, inputs)."""

    def __init__(self, file_manager: Optional[FileManager] = None):
        self.file_manager = file_manager or FileManager()
        self.protocol = ProtocolService(self.file_manager)
        self.inference = InferenceService(self.file_manager)
        self.processor = ResponseProcessor()

    def exact(self, args):
        agent = load_agent(self.file_manager.load_json(args.model))
        triple = agent.exact_triple()
        bell = cond_bell_delta(triple)
        vector = agent.exact_marginals()
        payload = {
            'model': dump_agent(agent),
            'triple': triple.model_dump(mode='json'),
            'delta': bell.delta,
            'violated': bell.violated,
            'marginals': list(vector.p_plus),
            'symmetric_marginals': vector.symmetric,
            'realizability': realize(triple).model_dump(mode='json'),
        }
        return payload, None, [args.model]

    def simulate(self, args):
        agent = load_agent(self.file_manager.load_json(args.model))
        if args.csv:
            result, frame = self.protocol.run_with_responses(agent, args.n, args.seed)
        else:
            result = self.protocol.run_protocol(agent, args.n, args.seed)
        out = self.file_manager.save_json(result.model_dump(mode='json'), args.out, category='results')
        payload = {'result': result.model_dump(mode='json'), 'out': str(out), 'csv': None}
        if args.csv:
            csv_path = self.file_manager.save_text(self.processor.to_csv(frame), args.csv, category='responses')
            payload['csv'] = str(csv_path)
        return payload, args.seed, [args.model]

    def analyze(self, args):
        cfg = self.inference.default_config(delta_threshold=args.delta, alpha=args.alpha,
                                            confidence=args.confidence, method=args.method)
        path = Path(args.data)
        if path.suffix.lower() == '.json':
            result = ProtocolResult.model_validate(self.file_manager.load_json(path))
        else:
            result = self.processor.parse_responses(path, seed=args.seed)
        report = self.inference.analyze_result(result, cfg)
        return report, result.seed, [args.data]

    def realizable(self, args):
        triple = ConditionalTriple.model_validate(self.file_manager.load_json(args.triple))
        payload = {'triple': triple.model_dump(mode='json'),
                   'delta': cond_bell_delta(triple).delta,
                   'verdict': realize(triple).model_dump(mode='json')}
        return payload, None, [args.triple]

    def maximize(self, args):
        return maximize_violation(args.grid_step, args.refine), None, []

    def power(self, args):
        cfg = self.inference.default_config(alpha=args.alpha)
        plan = self.inference.required_sample_size(args.target_delta, cfg, args.power, verify=args.verify,
                                                   replications=args.replications, seed=args.seed)
        return plan, args.seed if args.verify else None, []


def _arguments(args) -> Dict[str, Any]:
    skip = {'debug', 'quiet'}
    return {key: value for key, value in sorted(vars(args).items()) if key not in skip}


def _diagnose(name: str, message: str) -> None:
    line = ' '.join(str(message).split())
    print(f"condbell: error[{name}]: {line}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main function; returns the process exit code."""
    logger = get_logger('condbell')
    try:
        args = build_parser().parse_args(argv)
        if args.debug:
            set_console_level(logging.DEBUG)
        elif args.quiet:
            set_console_level(logging.WARNING)

        file_manager = FileManager()
        runner = CommandRunner(file_manager)
        reports = ReportService(file_manager)
        logger.debug(f"Running {args.command} with {_arguments(args)}")

        payload, seed, inputs = getattr(runner, args.command)(args)
        manifest = reports.build_manifest(args.command, _arguments(args), seed, inputs)
        document = reports.render(args.command, payload, manifest, args.format)
        if args.report:
            reports.save(document, args.report)
        sys.stdout.write(document)
        return 0
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else 0
    except CondBellError as e:
        logger.debug(f"{e.code}: {e}", exc_info=True)
        _diagnose(e.code, e)
        return e.exit_code
    except ValidationError as e:
        first = e.errors()[0]
        where = '.'.join(str(part) for part in first['loc'])
        _diagnose('ValidationError', f"{where}: {first['msg']}" if where else first['msg'])
        return 2
    except json.JSONDecodeError as e:
        _diagnose('IoFailure', f"invalid JSON: {e.msg}")
        return 2
    except OSError as e:
        _diagnose('IoFailure', f"{e.filename or ''}: {e.strerror or e}")
        return 2
    except Exception as e:
        logger.debug(f"Internal error: {e}", exc_info=True)
        _diagnose('InternalError', f"{type(e).__name__}: {e}")
        return 3
    finally:
        set_console_level(get_config().get('logging_config')['console_level'])


if __name__ == "__main__":
    sys.exit(main())
