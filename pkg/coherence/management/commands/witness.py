import numpy as np
from django.core.management.base import CommandError

from coherence.exceptions import EXIT_USAGE
from coherence.serialization import load_operator, load_state, load_witness, witness_to_dict
from coherence.witness import construct_witness, is_finer, is_witness

from ._common import CoherenceCommand

ARITY = {'make': 1, 'check': 1, 'finer': 2}


class Command(CoherenceCommand):
    help = ('Witness tools. make STATE: the optimal witness -rho + Delta(rho). '
            'check W: validity and optimality. finer W1 W2: whether W2 is finer than W1.')

    def add_command_arguments(self, parser):
        parser.add_argument('action', choices=sorted(ARITY))
        parser.add_argument('files', nargs='+')

    def run(self, config, action, files, **options):
        if len(files) != ARITY[action]:
            raise CommandError(f'{action} takes {ARITY[action]} file(s), got {len(files)}', returncode=EXIT_USAGE)
        if action == 'make':
            return witness_to_dict(construct_witness(load_state(files[0], config.tol), config.tol))
        if action == 'check':
            op = load_operator(files[0], config.tol)
            check = is_witness(op, config.tol)
            return {
                'witness': check.witness,
                'optimal': check.witness and bool(np.all(np.abs(op.diagonal) <= config.tol)),
                'diagonal_ok': check.diagonal_ok,
                'detects': check.detects,
                'normalized': check.normalized,
                'min_eigenvalue': check.min_eigenvalue,
                'min_diagonal': check.min_diagonal,
                'trace': check.trace,
                'reason': check.reason,
            }
        w1, w2 = (load_witness(f, config.tol) for f in files)
        return is_finer(w1, w2, config.tol)
