from coherence.linalg import trace_distance
from coherence.serialization import load_state
from coherence.tomography import (
    coherence_decision,
    measure_all,
    reconstruct,
    records_table,
    stokes_decision,
    stokes_reconstruct,
    stokes_simulate,
    su_basis,
)

from ._common import CoherenceCommand


class Command(CoherenceCommand):
    help = ('Simulate tomography of a state file and reconstruct it. stokes: four-intensity '
            'qubit protocol with --shots as the mean photon number; qudit: every SU(d) generator '
            'measured --shots times.')

    def add_command_arguments(self, parser):
        parser.add_argument('state', help='state file in the JSON matrix format')
        parser.add_argument('--mode', choices=['stokes', 'qudit'], default='qudit')
        parser.add_argument('--expectation', action='store_true',
                            help='use exact Born means instead of sampled counts')

    def run(self, config, state, mode, expectation, **options):
        rho = load_state(state, config.tol)
        if mode == 'stokes':
            record = stokes_simulate(rho, config.shots, config.seed, expectation)
            estimate = stokes_reconstruct(record, config.tol)
            decision = stokes_decision(record, config.alpha, config.tol)
            data = record
        else:
            basis = su_basis(rho.dim)
            records = measure_all(rho, basis, config.shots, config.seed, expectation)
            estimate = reconstruct(rho.dim, records, basis, config.tol)
            decision = coherence_decision(records, config.alpha, config.tol)
            data = records
        return {
            'mode': mode,
            'dim': rho.dim,
            'shots': config.shots,
            'expectation': expectation,
            'coherent': decision.coherent,
            'witness_label': decision.witness_label,
            'threshold': decision.threshold,
            'trace_distance': trace_distance(estimate.state, rho),
            'projected': estimate.projected,
            'state': estimate.state,
            'raw': estimate.raw,
            'data': data,
        }

    def csv_rows(self, report):
        if report['mode'] == 'stokes':
            return super().csv_rows(report)
        return records_table(report['data'])
