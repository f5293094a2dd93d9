"""Command line front end: `snowsca <command> ...` or `python -m snowsca`.

Each command resolves its full configuration (defaults and derived seeds filled
in), prints it with a summary as JSON on stdout and writes a JSON result that
embeds the configuration and tool version. `--plot` adds an SVG figure and the
CSV data behind it.
"""
import argparse
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .countermeasures import Variant
from .cpa import (Target, cpa_byte, kkc, model_comparison, mtd_curve, normalize_word,
        true_byte)
from .errors import (ArtifactWriteError, AttackIncompleteError, SnowScaError, TraceFileError,
        UsageError)
from .lda import DEFAULT_HALF_WIDTH, lda_accuracy_curve, lda_predict, lsb_labels
from .leakage import (KEY_STREAM, RANDOM, Granularity, LeakageModel, random_key,
        simulate_trace_set, trace_rng)
from .plotting import Curve, emit_plot, save_curve_csv
from .recovery import (byte_mtds, evaluation_key, incremental_recover, recovered_fraction,
        train_word_model)
from .snowv import Iv128, Key256, keystream, xor_crypt
from .traceset import TraceSet, export_csv, import_csv, load_trace_set, store_trace_set
from .tvla import TVLA_THRESHOLD, fixed_vs_random, tvla_incremental
from .utils import output_dir, to_json_text
from .utils_sources import Storage

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INCOMPLETE = 3

TOOL = 'snowsca'

# Namespace keys that are not part of the experiment config.
_INTERNAL = ('func',)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises instead of exiting with status 2."""

    def error(self, message: str):
        raise UsageError(f'{self.prog}: {message}')


def _add_output_args(parser: argparse.ArgumentParser):
    parser.add_argument('--out-dir', default=None, \
            help='output directory (default: $SNOWSCA_OUTPUT_DIR or the current directory)')
    parser.add_argument('--result', default=None, help='JSON result path (default: <out-dir>/<command>.json)')
    parser.add_argument('--plot', action='store_true', help='also write <result>.svg and <result>.csv')


def _add_model_args(parser: argparse.ArgumentParser):
    parser.add_argument('--variant', default=Variant.REFERENCE.value, choices=Variant.names())
    parser.add_argument('--hw-scale', type=float, default=LeakageModel.DEFAULT_HW_SCALE)
    parser.add_argument('--noise-sigma', type=float, default=LeakageModel.DEFAULT_NOISE_SIGMA)
    parser.add_argument('--branch-delta', type=float, default=LeakageModel.DEFAULT_BRANCH_DELTA)
    parser.add_argument('--granularity', default=Granularity.SLICED.value, \
            choices=[g.value for g in Granularity])
    parser.add_argument('--rounds', type=int, default=1, help='initialization rounds recorded (1..16)')
    parser.add_argument('--points', action='append', default=[], \
            help='keep only samples matching this pattern (repeatable)')
    parser.add_argument('--seed', type=int, default=0, help='master seed')
    parser.add_argument('--workers', type=int, default=1)


def _add_known_args(parser: argparse.ArgumentParser):
    parser.add_argument('--known', action='append', default=[], metavar='WORD=HEX', \
            help='recovered word or low byte, e.g. A[8]=0x1234 or B[9].lo=0x5a (repeatable)')


def _model(args: argparse.Namespace) -> LeakageModel:
    return LeakageModel(args.hw_scale, args.noise_sigma, args.branch_delta, args.granularity, \
            args.rounds, tuple(args.points))


def _known(args: argparse.Namespace) -> Dict[str, int]:
    known = {}
    for item in args.known:
        name, sep, value = item.partition('=')
        if not sep:
            raise UsageError(f'--known expects WORD=HEX, got {item!r}')
        word, _, half = name.partition('.')
        word = normalize_word(word)
        try:
            number = int(value, 16)
        except ValueError as ex:
            raise UsageError(f'--known value {value!r} is not hex') from ex
        if half == 'lo':
            known[f'{word}.lo'] = number & 0xFF
        elif not half:
            known[word] = number & 0xFFFF
        else:
            raise UsageError(f'--known accepts WORD or WORD.lo, got {name!r}')
    return known


def _key(args: argparse.Namespace, seed: int) -> Key256:
    """Parses --key, or derives one from seed and writes it back for the echo."""
    if args.key is None:
        key = random_key(trace_rng(seed, KEY_STREAM))
        args.key = key.hex()
        return key
    return Key256.from_hex(args.key)


def _result_path(args: argparse.Namespace, command: str) -> str:
    if args.result:
        return args.result
    return os.path.join(output_dir(args.out_dir), f'{command}.json')


def _write(data: bytes, path: str):
    error = Storage.for_location(path).write(data, path)
    if error is not None:
        raise ArtifactWriteError(path, error)


def _config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _INTERNAL}


def _emit_plot(args: argparse.Namespace, path: str, spec: Optional[tuple]) -> List[str]:
    """Writes <root>.svg and <root>.csv for (curves, xlabel, ylabel, title, threshold)."""
    if not args.plot or spec is None:
        return []
    curves, xlabel, ylabel, title, threshold = spec
    root = os.path.splitext(path)[0]
    emit_plot(curves, root + '.svg', xlabel, ylabel, title, threshold)
    header = [xlabel] + [c.label or f'y{i}' for i, c in enumerate(curves)]
    columns = [curves[0].x] + [[np.nan if y is None else y for y in c.y] for c in curves]
    save_curve_csv(root + '.csv', header, columns)
    return [root + '.svg', root + '.csv']


def _load(path: str, what: str) -> TraceSet:
    if not path:
        raise UsageError(f'{what} trace set path required')
    return load_trace_set(path)


# Commands return (result, summary, plot spec or None, extra outputs).
CommandResult = Tuple[dict, dict, Optional[tuple], List[str]]


def cmd_keystream(args: argparse.Namespace) -> CommandResult:
    """Keystream blocks, and optionally the XOR of a message with them."""
    key, iv = Key256.from_hex(args.key), Iv128.from_hex(args.iv)
    blocks = [b.hex() for b in keystream(key, iv, args.blocks)]
    result = {'blocks': blocks}
    if args.message is not None:
        try:
            message = bytes.fromhex(args.message)
        except ValueError as ex:
            raise UsageError(f'--message is not hex: {ex}') from ex
        result['ciphertext'] = xor_crypt(key, iv, message).hex()
    return result, {'blocks': blocks}, None, []


def cmd_simulate(args: argparse.Namespace) -> CommandResult:
    """Writes a simulated trace set."""
    if not args.trace_out:
        raise UsageError('--trace-out is required')
    if args.profile:
        args.key = RANDOM
        key = RANDOM
    else:
        key = _key(args, args.seed)
    iv = RANDOM if args.iv == RANDOM else Iv128.from_hex(args.iv)
    ts = simulate_trace_set(key, iv, args.traces, _model(args), args.variant, args.seed, \
            keep_keystream=args.keep_keystream, store_key=not args.no_store_key, \
            workers=args.workers)
    paths = list(store_trace_set(ts, args.trace_out))
    summary = {'n_traces': ts.n_traces, 'n_samples': ts.n_samples, 'files': paths}
    return dict(summary, names=list(ts.names)), summary, None, paths


def cmd_tvla(args: argparse.Namespace) -> CommandResult:
    """Incremental fixed-vs-random t-test, on files or freshly simulated sets."""
    if bool(args.fixed) != bool(args.random):
        raise UsageError('--fixed and --random must be given together')
    if args.fixed:
        ts_fixed, ts_random = _load(args.fixed, 'fixed'), _load(args.random, 'random')
    else:
        key = _key(args, args.seed)
        ts_fixed, ts_random = fixed_vs_random(key, args.traces, _model(args), args.variant, \
                args.seed, workers=args.workers)
    curve = tvla_incremental(ts_fixed, ts_random, threshold=args.threshold)
    result = curve.to_dict()
    summary = {'first_crossing': curve.first_crossing, 'final_max_abs_t': curve.max_abs_t[-1]}
    plot = ([Curve(curve.sizes, curve.max_abs_t, 'max |t|')], 'traces per group', 'max |t|', \
            'fixed vs random t-test', curve.threshold)
    return result, summary, plot, []


def cmd_kkc(args: argparse.Namespace) -> CommandResult:
    """Known-key correlation of one intermediate, or the model width comparison."""
    ts = _load(args.traces, 'attack')
    key = Key256.from_hex(args.key) if args.key else evaluation_key(ts)
    if key is None:
        raise UsageError('--key is required when the trace set has no common key')
    args.key = key.hex()
    if args.compare:
        try:
            widths = [int(w) for w in args.widths.split(',')]
        except ValueError as ex:
            raise UsageError(f'--widths expects comma separated integers: {ex}') from ex
        peaks = model_comparison(ts, key, widths, args.intermediate)
        result = {'intermediate': args.intermediate, 'peaks': {str(w): p for w, p in peaks.items()}}
        plot = ([Curve(list(peaks), list(peaks.values()), '|rho|')], 'model bits', 'peak |rho|', \
                f'model comparison ({args.intermediate})', None)
        return result, result, plot, []
    res = kkc(ts, key, args.intermediate, args.model_bits)
    result = res.to_dict(ts.names)
    summary = {'poi': result['poi'], 'peak': res.peak}
    plot = ([Curve(list(range(ts.n_samples)), [float(c) for c in res.correlation], 'rho')], \
            'sample', 'correlation', f'known-key correlation ({args.intermediate})', None)
    return result, summary, plot, []


def cmd_cpa(args: argparse.Namespace) -> CommandResult:
    """Ranks one key byte."""
    known = _known(args)
    ts = _load(args.traces, 'attack')
    res = cpa_byte(ts, Target.parse(args.target), known)
    result = res.to_dict(ts.names)
    summary = {'target': res.target.name, 'best': f'0x{res.ranking.best:02x}', \
            'ghosts': result.get('ghosts')}
    plot = ([Curve(list(range(256)), [float(p) for p in res.ranking.signed_peak], 'peak')], \
            'hypothesis', 'correlation', f'CPA {res.target.name}', None)
    return result, summary, plot, []


def _true_value(args: argparse.Namespace, ts: TraceSet, target: Target) -> int:
    if args.true_value is not None:
        try:
            return int(args.true_value, 16) & 0xFF
        except ValueError as ex:
            raise UsageError(f'--true-value {args.true_value!r} is not hex') from ex
    key = evaluation_key(ts)
    if key is None:
        raise UsageError('--true-value is required when the trace set has no common key')
    value = true_byte(key, target)
    args.true_value = f'{value:02x}'
    return value


def cmd_mtd(args: argparse.Namespace) -> CommandResult:
    """Rank of the true byte over growing trace counts."""
    known = _known(args)
    ts = _load(args.traces, 'attack')
    target = Target.parse(args.target)
    curve = mtd_curve(ts, target, _true_value(args, ts, target), known)
    summary = {'target': curve.target, 'mtd': curve.mtd}
    plot = ([Curve(curve.sizes, curve.true_peak, 'true'), \
            Curve(curve.sizes, curve.best_wrong_peak, 'best wrong')], \
            'traces', 'correlation', f'MTD {curve.target}', None)
    return curve.to_dict(), summary, plot, []


def cmd_lda(args: argparse.Namespace) -> CommandResult:
    """Trains the LSB classifier of one word and scores it on a held-out set."""
    profile, test = _load(args.profile, 'profiling'), _load(args.test, 'test')
    word = normalize_word(args.word)
    model = train_word_model(profile, word, args.half_width)
    labels = lsb_labels(test, word)
    predicted = model.predict(test.samples)
    curve = lda_accuracy_curve(profile, test, word, half_width=args.half_width)
    result = {'model': model.to_dict(), 'held_out_accuracy': float(np.mean(predicted == labels)), \
            'single_trace': {'predicted': lda_predict(model, test.samples[0]), \
            'label': int(labels[0])}, 'curve': curve.to_dict()}
    summary = {'word': word, 'held_out_accuracy': result['held_out_accuracy'], \
            'perfect_from': curve.perfect_from}
    plot = ([Curve(curve.sizes, curve.training, 'training'), \
            Curve(curve.sizes, curve.held_out, 'held-out')], \
            'profiling traces', 'accuracy', f'LDA {word} LSB', None)
    return result, summary, plot, []


def _attack_result(report, key: Optional[Key256] = None) -> dict:
    result = report.to_dict()
    result['byte_mtds'] = byte_mtds(report)
    if key is not None:
        result['recovered_fraction'] = recovered_fraction(report, key)
        result['mismatches'] = {w: list(d) for w, d in report.verify(key).items()}
    return result


def cmd_attack(args: argparse.Namespace) -> CommandResult:
    """Full incremental key recovery."""
    known = _known(args)
    ts, profile = _load(args.traces, 'attack'), _load(args.profile, 'profiling')
    report = incremental_recover(ts, profile, known, args.half_width, \
            evaluate=not args.no_evaluate)
    result = _attack_result(report, evaluation_key(ts))
    return result, {'complete': report.complete, 'key': result['key']}, None, []


def cmd_counter_eval(args: argparse.Namespace) -> CommandResult:
    """TVLA, CPA MTD and LDA accuracy against one implementation variant."""
    key = _key(args, args.seed)
    model = _model(args)
    tvla_seed, attack_seed, profile_seed = (int(s) for s in \
            np.random.SeedSequence(args.seed).generate_state(3))
    ts_fixed, ts_random = fixed_vs_random(key, args.traces, model, args.variant, tvla_seed, \
            workers=args.workers)
    tvla = tvla_incremental(ts_fixed, ts_random)
    attack = simulate_trace_set(key, RANDOM, args.attack_traces, model, args.variant, \
            attack_seed, workers=args.workers)
    target = Target.parse(args.target)
    mtd = mtd_curve(attack, target, true_byte(key, target))
    profile = simulate_trace_set(RANDOM, RANDOM, args.profile_traces, model, args.variant, \
            profile_seed, workers=args.workers)
    accuracy = lda_accuracy_curve(profile, attack, target.word)
    result = {'variant': args.variant, 'tvla': tvla.to_dict(), 'mtd': mtd.to_dict(), \
            'lda': accuracy.to_dict()}
    summary = {'variant': args.variant, 'tvla_first_crossing': tvla.first_crossing, \
            'tvla_final_max_abs_t': tvla.max_abs_t[-1], 'mtd': mtd.mtd, \
            'lda_final_accuracy': accuracy.held_out[-1] if accuracy.held_out else None}
    plot = ([Curve(tvla.sizes, tvla.max_abs_t, args.variant)], 'traces per group', 'max |t|', \
            f'fixed vs random t-test ({args.variant})', TVLA_THRESHOLD)
    return result, summary, plot, []


def cmd_convert(args: argparse.Namespace) -> CommandResult:
    """CSV to trace-set pair and back."""
    if args.to == 'trace':
        if not args.metadata:
            raise UsageError('--metadata is required to import CSV')
        ts = import_csv(args.input, args.metadata)
        outputs = list(store_trace_set(ts, args.output))
    else:
        ts = load_trace_set(args.input)
        doc = export_csv(ts, args.output)
        meta_path = args.metadata or os.path.splitext(args.output)[0] + '.json'
        _write(to_json_text(doc).encode('utf-8'), meta_path)
        outputs = [args.output, meta_path]
    summary = {'n_traces': ts.n_traces, 'n_samples': ts.n_samples, 'files': outputs}
    return summary, summary, None, outputs


def build_parser() -> ArgumentParser:
    """Returns the argument parser of all commands."""
    parser = ArgumentParser(prog=TOOL, description='SNOW-V side-channel analysis lab')
    parser.add_argument('--version', action='version', version=f'{TOOL} {__version__}')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    def command(name: str, func: Callable, help_text: str) -> ArgumentParser:
        cmd = sub.add_parser(name, help=help_text, description=help_text)
        cmd.set_defaults(func=func)
        _add_output_args(cmd)
        return cmd

    cmd = command('keystream', cmd_keystream, 'print keystream blocks')
    cmd.add_argument('--key', required=True, help='64 hex digits')
    cmd.add_argument('--iv', required=True, help='32 hex digits')
    cmd.add_argument('-n', '--blocks', type=int, default=1)
    cmd.add_argument('--message', default=None, help='hex message to XOR with the keystream')

    cmd = command('simulate', cmd_simulate, 'write a simulated trace set')
    _add_model_args(cmd)
    cmd.add_argument('--trace-out', required=True, help='trace set root path (local or s3://)')
    cmd.add_argument('--key', default=None, help='64 hex digits (default: derived from --seed)')
    cmd.add_argument('--iv', default=RANDOM, help='32 hex digits or "random"')
    cmd.add_argument('-n', '--traces', type=int, default=1000)
    cmd.add_argument('--profile', action='store_true', help='random key per trace (LDA profiling set)')
    cmd.add_argument('--keep-keystream', action='store_true')
    cmd.add_argument('--no-store-key', action='store_true')

    cmd = command('tvla', cmd_tvla, 'fixed-vs-random Welch t-test')
    _add_model_args(cmd)
    cmd.add_argument('--fixed', default=None, help='fixed-input trace set')
    cmd.add_argument('--random', default=None, help='random-input trace set')
    cmd.add_argument('--key', default=None)
    cmd.add_argument('-n', '--traces', type=int, default=100, help='traces per group when simulating')
    cmd.add_argument('--threshold', type=float, default=TVLA_THRESHOLD)

    cmd = command('kkc', cmd_kkc, 'known-key correlation')
    cmd.add_argument('traces')
    cmd.add_argument('--key', default=None)
    cmd.add_argument('--intermediate', default='u0', help='u0..u7 or v0..v7')
    cmd.add_argument('--model-bits', type=int, default=16)
    cmd.add_argument('--compare', action='store_true', help='compare model widths instead')
    cmd.add_argument('--widths', default='4,6,8,16')

    cmd = command('cpa', cmd_cpa, 'rank the hypotheses of one key byte')
    cmd.add_argument('traces')
    cmd.add_argument('--target', default='A[8].lo')
    _add_known_args(cmd)

    cmd = command('mtd', cmd_mtd, 'minimum traces to disclosure of one key byte')
    cmd.add_argument('traces')
    cmd.add_argument('--target', default='A[8].lo')
    cmd.add_argument('--true-value', default=None, help='hex byte (default: from the trace set key)')
    _add_known_args(cmd)

    cmd = command('lda', cmd_lda, 'train and evaluate the LSB classifier')
    cmd.add_argument('--profile', required=True)
    cmd.add_argument('--test', required=True)
    cmd.add_argument('--word', default='A[8]')
    cmd.add_argument('--half-width', type=int, default=DEFAULT_HALF_WIDTH)

    cmd = command('attack', cmd_attack, 'recover the full key')
    cmd.add_argument('traces')
    cmd.add_argument('--profile', required=True)
    cmd.add_argument('--half-width', type=int, default=DEFAULT_HALF_WIDTH)
    cmd.add_argument('--no-evaluate', action='store_true', help='skip per-byte MTD evaluation')
    _add_known_args(cmd)

    cmd = command('counter-eval', cmd_counter_eval, 'rerun TVLA, CPA and LDA against a variant')
    _add_model_args(cmd)
    cmd.add_argument('--key', default=None)
    cmd.add_argument('--target', default='A[8].lo')
    cmd.add_argument('-n', '--traces', type=int, default=1000, help='TVLA traces per group')
    cmd.add_argument('--attack-traces', type=int, default=2000)
    cmd.add_argument('--profile-traces', type=int, default=200)

    cmd = command('convert', cmd_convert, 'convert between CSV and the trace-set format')
    cmd.add_argument('input')
    cmd.add_argument('output')
    cmd.add_argument('--to', required=True, choices=['csv', 'trace'])
    cmd.add_argument('--metadata', default=None, help='metadata JSON (read for csv->trace, written for trace->csv)')
    return parser


def _document(args: argparse.Namespace, config: dict, result: dict) -> dict:
    return {'tool': TOOL, 'version': __version__, 'command': args.command, \
            'config': config, 'result': result}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Runs one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as ex:
        print(ex.message, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as ex:
        return int(ex.code or 0)
    path = None
    try:
        path = _result_path(args, args.command)
        result, summary, plot, outputs = args.func(args)
        config = _config(args)
        _write(to_json_text(_document(args, config, result)).encode('utf-8'), path)
        outputs = [path] + outputs + _emit_plot(args, path, plot)
    except AttackIncompleteError as ex:
        config = _config(args)
        result = dict(_attack_result(ex.report), reason=ex.reason)
        try:
            _write(to_json_text(_document(args, config, result)).encode('utf-8'), path)
        except SnowScaError as write_ex:
            print(write_ex.message, file=sys.stderr)
        print(to_json_text({'config': config, 'summary': {'complete': False, \
                'reason': ex.reason}, 'outputs': [path]}), end='')
        print(ex.message, file=sys.stderr)
        return EXIT_INCOMPLETE
    except (TraceFileError, ArtifactWriteError) as ex:
        print(ex.message, file=sys.stderr)
        return EXIT_INPUT
    except SnowScaError as ex:
        print(ex.message, file=sys.stderr)
        return EXIT_USAGE
    print(to_json_text({'config': config, 'summary': summary, 'outputs': outputs}), end='')
    return EXIT_OK


def main():
    """Console script entry point."""
    sys.exit(run())
