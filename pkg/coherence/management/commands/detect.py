from django.core.management.base import CommandError

from coherence.exceptions import EXIT_USAGE
from coherence.scheduler import detect, dicke_report, state_oracle
from coherence.serialization import load_state

from ._common import CoherenceCommand


class Command(CoherenceCommand):
    help = ('Adaptive detection: measure off-diagonal generators one at a time until one is '
            'significantly nonzero. With --dicke, report the three-qubit uniform superposition '
            'example instead of reading a state file.')

    def add_command_arguments(self, parser):
        parser.add_argument('state', nargs='?', help='state file in the JSON matrix format')
        parser.add_argument('--policy', choices=['random', 'fixed'], default='random')
        parser.add_argument('--resolution', type=float, default=0.05,
                            help='widest confidence band still reported as incoherent')
        parser.add_argument('--expectation', action='store_true',
                            help='answer with exact means instead of sampled counts')
        parser.add_argument('--dicke', action='store_true')
        parser.add_argument('--trials', type=int, default=1_000_000,
                            help='Monte Carlo trials for --dicke')
        parser.add_argument('--detect-trials', type=int, default=10_000, dest='detect_trials',
                            help='detection runs averaged for --dicke')

    def run(self, config, state, policy, resolution, expectation, dicke, trials, detect_trials, **options):
        if dicke:
            return dicke_report(trials, config.seed, detect_trials)
        if state is None:
            raise CommandError('a state file is required unless --dicke is given', returncode=EXIT_USAGE)
        rho = load_state(state, config.tol)
        oracle = state_oracle(rho, expectation=expectation)
        return detect(oracle, rho.dim, policy, config.shots, config.alpha, config.seed, resolution, config.tol)
