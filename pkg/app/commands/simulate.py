"""
Exo-Mix - simulate commands
"""
import click

from ..models.simulation import PricingSimConfig, UniformMixtureConfig
from ..services.simulation_service import SimulationService
from ..utils.decorators import handle_errors
from ..utils.helpers import write_csv, write_json
from .common import finish, output_dir, recorded, resolved_params, seed_option


@click.group()
def simulate():
    """Generate seeded datasets."""


@simulate.command('uniform')
@click.option('--t', 'T', type=int, default=2000, show_default=True, help='Number of rows.')
@click.option('--pi', type=float, default=0.6, show_default=True, help='Exogenous component share.')
@click.option('--beta', type=float, default=2.0, show_default=True, help='True slope.')
@click.option('--emit-latent', is_flag=True, help='Add the component and epsilon columns.')
@seed_option
@handle_errors
@recorded
def uniform(opts, T, pi, beta, emit_latent):
    """Two-component uniform design: columns Y, X, W1, W2."""
    config = UniformMixtureConfig(T=T, pi=pi, beta=beta, seed=opts['seed'])
    dataset = SimulationService.simulate_uniform_mixture(config)
    out = output_dir()
    csv_path = write_csv(dataset.to_frame(emit_latent), out / 'uniform.csv')
    sidecar = {
        'config': resolved_params(),
        'generator': config.to_dict(),
        'rows': int(config.T),
        'share_exogenous': float((dataset.latent_component == 2).mean()),
        'plim_full_sample': SimulationService.uniform_plim(beta, pi),
        'latent_columns': ['component', 'epsilon'] if emit_latent else [],
    }
    json_path = write_json(out / 'uniform.json', sidecar)
    finish([csv_path, json_path])


simulate.add_command(uniform, 'section3')


@simulate.command('pricing')
@click.option('--stores', type=int, default=24, show_default=True)
@click.option('--weeks', type=int, default=72, show_default=True)
@click.option('--products', type=int, default=6, show_default=True)
@click.option('--zones', type=int, default=2, show_default=True)
@click.option('--categories', type=int, default=2, show_default=True)
@click.option('--hilo-shift', type=float, default=0.04, show_default=True)
@click.option('--edlp-shift', type=float, default=-0.04, show_default=True)
@click.option('--noise-sd', type=float, default=0.01, show_default=True)
@click.option('--elasticity', type=float, default=-2.0, show_default=True)
@click.option('--block-weeks', type=int, default=12, show_default=True)
@click.option('--emit-latent', is_flag=True, help='Also write the true store-week regimes.')
@seed_option
@handle_errors
@recorded
def pricing(opts, stores, weeks, products, zones, categories, hilo_shift, edlp_shift, noise_sd,
            elasticity, block_weeks, emit_latent):
    """Synthetic scanner panel with Control / Hi-Lo / EDLP regimes."""
    config = PricingSimConfig(
        n_stores=stores, n_weeks=weeks, n_products=products, n_zones=zones,
        n_categories=categories, hilo_shift=hilo_shift, edlp_shift=edlp_shift,
        noise_sd=noise_sd, elasticity=elasticity, block_weeks=block_weeks, seed=opts['seed'],
    )
    dataset = SimulationService.simulate_pricing(config)
    out = output_dir()
    artifacts = [write_csv(dataset.panel.frame, out / 'panel.csv')]
    if emit_latent:
        artifacts.append(write_csv(dataset.truth, out / 'truth.csv'))
    artifacts.append(write_json(out / 'pricing.json', {
        'config': resolved_params(),
        'generator': config.to_dict(),
        'rows': len(dataset.panel),
        'regime_shares': dataset.truth['regime'].value_counts(normalize=True).sort_index().to_dict(),
    }))
    finish(artifacts)
