# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.

import argparse
import json
import sys

from netsim import style as S
from netsim.constants import (BASE_SHAPES, DEFAULT_DELAY_BOUND, DEFAULT_GROWTH_FACTOR,
                              DEFAULT_SEED, DELAY_ALIASES, X_SWEEP)
from netsim.db_export import maybe_save_runs
from netsim.election import ProtocolViolationError, run_election, write_trace
from netsim.engine import DelayModel, DelayModelError, EventLimitExceeded, UnknownSenderError
from netsim.experiment import ConfigError, ExperimentConfig, run_experiment
from netsim.fragments import InvalidGrowthFactorError
from netsim.oracle import InvalidFragmentGraphError, bound_table, oracle_run
from netsim.pif import PropagationIncompleteError, run_pif
from netsim import report_export as _export
from netsim import topology as topo

_HANDLED = (
    topo.TopologyError, UnknownSenderError, DelayModelError, EventLimitExceeded,
    PropagationIncompleteError, ProtocolViolationError, InvalidGrowthFactorError,
    InvalidFragmentGraphError, ConfigError, OSError, json.JSONDecodeError,
)


# ────────────────────────────────────────────────────────────────────
# Helpers
# ────────────────────────────────────────────────────────────────────

def _emit(payload):
    """Machine-readable result on stdout; everything else goes to stderr."""
    json.dump(payload, sys.stdout, sort_keys=False)
    sys.stdout.write('\n')


def _load_topology(path):
    t = topo.load(path)
    topo.validate(t)
    return t


def _delay_model(args):
    return DelayModel(DELAY_ALIASES[args.delay], args.seed, args.delay_bound)


def _add_delay_args(p):
    p.add_argument('--delay', choices=sorted(DELAY_ALIASES), default='unit',
                   help='Delay model: unit (every hop 1) or random (uniform in (0, bound])')
    p.add_argument('--delay-bound', type=float, default=DEFAULT_DELAY_BOUND,
                   help='Upper bound on a single delivery delay')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Seed for random delays')
    p.add_argument('--max-events', type=int, default=None,
                   help='Event guard (default: NETSIM_MAX_EVENTS or built-in)')
    p.add_argument('--event-log', help='Write one tab-separated line per delivery to FILE')


# ────────────────────────────────────────────────────────────────────
# Subcommands
# ────────────────────────────────────────────────────────────────────

def cmd_generate(args):
    t = topo.generate(args.n, args.shape, args.connectivity, args.seed)
    topo.validate(t)
    if args.out:
        topo.save(t, args.out)
        S.status(S.success(f"Topology written to {args.out} ({t.n} nodes, {t.edge_count} edges)"))
    else:
        _emit(t.to_json())


def cmd_validate(args):
    t = _load_topology(args.topology)
    S.status(S.success(f"{args.topology}: valid ({t.n} nodes, {t.edge_count} edges)"))
    _emit({'valid': True, 'n': t.n, 'edges': t.edge_count})


def cmd_pif(args):
    t = _load_topology(args.topology)
    result = run_pif(t, args.source, _delay_model(args), args.max_events, args.event_log)
    if args.verbose:
        S.print_key_values([
            ('Sources', ', '.join(str(s) for s in result.sources)),
            ('Transmissions', f"{result.transmissions} (limit {2 * t.n * len(result.sources)})"),
            ('Termination time', f"{result.time:.3f}"),
        ], title='PIF')
    _emit(result.to_json())


def cmd_elect(args):
    t = _load_topology(args.topology)
    result = run_election(t, args.x, _delay_model(args), args.initiators, args.max_events,
                          args.event_log)
    if args.trace:
        write_trace(result, args.trace)
    if args.verbose:
        S.print_key_values([
            ('Merges', len(result.merges)),
            ('Work phases', len(result.work_phases)),
            ('Init time', f"{result.init_time:.3f}"),
            ('Time excl. init', f"{result.time_excl_init:.3f}"),
            ('Transmissions', result.transmissions),
            ('Leader', result.leader),
        ], title='Election')
    _emit(result.to_json())


def cmd_oracle(args):
    t = _load_topology(args.topology)
    result = oracle_run(t, args.x)
    _emit(result.to_json())


def cmd_experiment(args):
    cfg = ExperimentConfig.from_json(args.config)
    out_dir = _export.resolve_output_dir(args.out)
    S.status(S.header(f"Experiment: n={cfg.n}, X={cfg.x:g}, {cfg.replications} replications"))
    result = run_experiment(cfg, verbose=True)

    paths = list(_export.write_csvs(result, out_dir))
    paths.append(_export.write_plot_script(out_dir, 'experiment'))
    if args.workbook:
        paths.append(_export.write_workbook_to(result, out_dir))
    saved = maybe_save_runs(result.runs, cfg)
    if saved:
        S.status(S.success(f"{saved} runs saved to database."))

    S.status(f"\n{S.subheader('Summary')}")
    for rec in result.summary.to_dict('records'):
        S.status(f"  {rec['base_shape']:<12} C={rec['connectivity']:<5g} "
                 f"max_time={rec['max_time']:.3f}  max_tx={rec['max_transmissions']}  "
                 f"max_id_leader={rec['leader_is_max_id']:.2f}")
    worst_time = float(result.bounds['time_margin'].min())
    worst_msgs = float(result.bounds['message_margin'].min())
    worst_work = float(result.bounds['work_message_margin'].min())
    S.status(f"  worst time margin       : {S.margin_colored(worst_time)}")
    S.status(f"  worst message margin    : {S.margin_colored(worst_msgs)} (closed form)")
    S.status(f"  worst accounting margin : {S.margin_colored(worst_work)}")
    for problem in result.growth_problems:
        S.status(S.warning(f"  {problem}"))
    for path in paths:
        S.status(S.muted(f"  wrote {path}"))
    _emit({'out_dir': out_dir, 'files': paths, 'all_bounds_hold': result.all_bounds_hold,
           'growth_problems': len(result.growth_problems)})


def cmd_sweep_x(args):
    if args.steps < 2:
        raise ConfigError("--steps must be at least 2")
    step = (args.x_max - args.x_min) / (args.steps - 1)
    xs = sorted(set([args.x_min + i * step for i in range(args.steps)] + list(X_SWEEP)))
    xs = [x for x in xs if args.x_min <= x <= args.x_max]
    table = bound_table(args.n, xs)
    out_dir = _export.resolve_output_dir(args.out)
    files = [_export.write_bounds_vs_x(table, out_dir), _export.write_plot_script(out_dir, 'bounds')]
    best = table.loc[table['time_factor'].idxmin()]
    S.status(S.info(f"  lowest time factor on the grid: X={best['x']:.3f} -> {best['time_factor']:.3f}"))
    _emit({'out_dir': out_dir, 'files': files, 'rows': len(table)})


# ────────────────────────────────────────────────────────────────────
# Entry
# ────────────────────────────────────────────────────────────────────

def build_parser():
    parser = argparse.ArgumentParser(description='Broadcast network PIF and leader election simulator')
    parser.add_argument('-v', '--verbose', action='store_true', help='Print a summary to stderr')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='Write a random topology as JSON')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--shape', choices=BASE_SHAPES, default='string')
    p.add_argument('--connectivity', type=float, default=0.0)
    p.add_argument('--seed', type=int, default=DEFAULT_SEED)
    p.add_argument('--out', help='Topology file (default: stdout)')
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('validate', help='Validate a topology file')
    p.add_argument('--topology', required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('pif', help='Propagation of information with feedback')
    p.add_argument('--topology', required=True)
    p.add_argument('--source', type=int, action='append', required=True,
                   help='Source node; repeat for independent concurrent propagations')
    _add_delay_args(p)
    p.set_defaults(func=cmd_pif)

    p = sub.add_parser('elect', help='Distributed leader election')
    p.add_argument('--topology', required=True)
    p.add_argument('--x', type=float, default=DEFAULT_GROWTH_FACTOR, help='Growth factor X > 1')
    p.add_argument('--trace', help='Write the merge trace to FILE')
    p.add_argument('--initiators', type=int, nargs='+', help='Nodes that start spontaneously')
    _add_delay_args(p)
    p.set_defaults(func=cmd_elect)

    p = sub.add_parser('oracle', help='Fragment-level election oracle')
    p.add_argument('--topology', required=True)
    p.add_argument('--x', type=float, default=DEFAULT_GROWTH_FACTOR)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser('experiment', help='Simulation study over random topologies')
    p.add_argument('--config', required=True, help='Experiment configuration JSON file')
    p.add_argument('--out', help='Output directory (default: NETSIM_OUTPUT_DIR or ./netsim_output)')
    p.add_argument('--workbook', action='store_true', help='Also write results.xlsx')
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser('sweep-x', help='Time and message bounds against X')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--x-min', type=float, default=1.25)
    p.add_argument('--x-max', type=float, default=8.0)
    p.add_argument('--steps', type=int, default=60)
    p.add_argument('--out', help='Output directory (default: NETSIM_OUTPUT_DIR or ./netsim_output)')
    p.set_defaults(func=cmd_sweep_x)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except _HANDLED as e:
        S.status(S.error(f"Error: {e}"))
        sys.exit(1)
    return 0


if __name__ == '__main__':
    main()
