"""
Exo-Mix - Reproduction Script
Runs the Monte Carlo checks and writes their results to the output directory.

Usage:
    python scripts/reproduce.py [--seeds 50] [--output output/reproduce] [--quick]
"""
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import click

from app import create_app
from app.jobs import monte_carlo_job
from app.utils.helpers import to_jsonable, write_json


def reproduce(seeds=50, output='output/reproduce', quick=False):
    """Run every experiment and return the collected results."""
    create_app('production')
    seeds = list(range(seeds))
    replicates = 50 if quick else 200
    T_large = 20_000 if quick else 100_000

    results = {}

    print("[1/7] Full-sample OLS bias...")
    results['naive_bias'] = monte_carlo_job.naive_bias(T=T_large)
    print(f"  beta={results['naive_bias']['beta']:.4f} (plim {results['naive_bias']['plim']:.4f})")

    print("[2/7] Subset consistency with bootstrap...")
    run = monte_carlo_job.subset_consistency(seeds, replicates=replicates)
    results['subset_consistency'] = {k: run[k] for k in ('mean_beta', 'coverage', 'betas')}
    print(f"  mean beta={run['mean_beta']:.4f}, coverage={run['coverage']:.2%}")

    print("[3/7] Weight recovery...")
    run = monte_carlo_job.weight_recovery(seeds)
    results['weight_recovery'] = run
    print(f"  {run['n_within']} of {len(seeds)} seeds within 0.05 of 0.6")

    print("[4/7] Oracle selection...")
    run = monte_carlo_job.oracle_selection()
    results['oracle_selection'] = {'identical': run['identical'], 'fraction': run['fraction']}
    print(f"  identical={run['identical']}, fraction={run['fraction']:.4f}")

    print("[5/7] Bias decay across thresholds...")
    decay_seeds = list(range(50 if quick else 200))
    results['bias_decay'] = monte_carlo_job.bias_decay(decay_seeds)
    print("  " + ", ".join(f"p={p}: {v:.4f}" for p, v in results['bias_decay'].items()))

    print("[6/7] Density recovery...")
    errors = monte_carlo_job.density_recovery()
    results['density_recovery'] = {f'{label}/{coord}': v for (label, coord), v in
                                   ((k, v) for k, v in errors.items() if k != 'mean')}
    results['density_recovery']['mean'] = errors['mean']
    print(f"  mean integrated absolute error={errors['mean']:.4f}")

    print("[7/7] Pricing panel...")
    run = monte_carlo_job.pricing_recovery()
    results['pricing'] = {
        'accuracy': run['accuracy'],
        'price_change': run['price_change'],
        'did': run['did']['result'].to_dict() if run['did'] else None,
        'elasticity': run['elasticity'],
    }
    if run['accuracy']:
        print(f"  accuracy={run['accuracy']['overall']['accuracy']:.3f}")

    path = write_json(os.path.join(output, 'reproduce.json'), to_jsonable(results))
    print(f"[SUCCESS] Results written to {path}")
    return results


@click.command()
@click.option('--seeds', type=int, default=50, show_default=True)
@click.option('--output', default='output/reproduce', show_default=True)
@click.option('--quick', is_flag=True, help='Fewer replicates and smaller samples.')
def main(seeds, output, quick):
    reproduce(seeds, output, quick)


if __name__ == '__main__':
    main()
