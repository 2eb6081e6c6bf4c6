from coherence.scheduler import expectation_report, expectation_table
from coherence.serialization import to_jsonable

from ._common import CoherenceCommand

COLUMNS = ['N', 'i', 'E_formula', 'E_closed', 'E_mc', 'mc_stderr']


class Command(CoherenceCommand):
    help = ('Expected number of measurements for N observables of which i vanish: the '
            'combinatorial formula, the closed form and Monte Carlo. Without i, the table '
            'for every N <= N_max and 0 <= i <= N.')

    def add_command_arguments(self, parser):
        parser.add_argument('N', type=int)
        parser.add_argument('i', type=int, nargs='?')
        parser.add_argument('--trials', type=int, default=100_000)

    def run(self, config, N, i, trials, **options):
        if i is None:
            return expectation_table(N, trials, config.seed)
        return expectation_report(N, i, trials, config.seed)

    def csv_rows(self, report):
        data = to_jsonable(report)
        rows = data if isinstance(data, list) else [data]
        return COLUMNS, [[row[c] for c in COLUMNS] for row in rows]
