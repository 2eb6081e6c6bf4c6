from coherence.exceptions import NonConvergenceError
from coherence.measures import ratio_check, roc, verify_theorem4
from coherence.serialization import dumps, load_state

from ._common import CoherenceCommand


class Command(CoherenceCommand):
    help = 'Print C_h, C_l1 and the robustness of coherence (with certificates) for a state file.'

    def add_command_arguments(self, parser):
        parser.add_argument('state', help='state file in the JSON matrix format')
        parser.add_argument('--max-cuts', type=int, dest='max_cuts',
                            help='cut budget of the robustness solver (default COHLAB_ROC_MAX_CUTS)')

    def run(self, config, state, **options):
        rho = load_state(state, config.tol)
        ratio = ratio_check(rho, config.tol)
        try:
            solution = roc(rho, config.tol, config.max_cuts)
        except NonConvergenceError as exc:
            self.stdout.write(dumps({
                'c_h': ratio.c_h,
                'c_l1': ratio.c_l1,
                'roc_lower': exc.lower,
                'roc_upper': exc.upper,
                'iterations': exc.iterations,
            }))
            raise
        report = {
            'dim': rho.dim,
            'coherent': rho.is_coherent,
            'c_h': ratio.c_h,
            'c_l1': ratio.c_l1,
            'roc': solution.value,
            'roc_primal_gap': solution.primal_gap,
            'roc_dual_gap': solution.dual_gap,
            'roc_iterations': solution.iterations,
            'ratio_upper_holds': ratio.upper_holds,
            'ratio_lower_holds': ratio.lower_holds,
            'robustness': solution,
        }
        if solution.tau is not None:
            split = verify_theorem4(rho, config.tol, solution)
            report.update({
                'split_residual': split.residual,
                'c_h_tau': split.c_h_tau,
                'tau_bound_holds': split.tau_bound_holds,
            })
        return report
