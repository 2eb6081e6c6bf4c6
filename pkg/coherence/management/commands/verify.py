from coherence import verification
from coherence.exceptions import EXIT_OK, EXIT_VERIFICATION

from ._common import CoherenceCommand


class Command(CoherenceCommand):
    help = 'Run the property suites; exit 1 if any check fails. Findings are reported, never fatal.'

    def add_command_arguments(self, parser):
        parser.add_argument('suite', nargs='?', default='all', choices=['all', *verification.SUITES])
        parser.add_argument('--trials', type=int, help='main trial count of each suite (suite defaults otherwise)')

    def run(self, config, suite, trials, **options):
        results = verification.run(suite, trials, config.seed)
        return {'passed': all(r.passed for r in results), 'suites': results}

    def exit_code(self, report):
        return EXIT_OK if report['passed'] else EXIT_VERIFICATION

    def failure_message(self, report):
        failed = [f'{s.name}/{c.name}' for s in report['suites'] for c in s.checks if not c.passed]
        return f'verification failed: {", ".join(failed)}'

    def csv_rows(self, report):
        rows = [[s.name, c.name, c.passed, c.trials, c.failures, c.worst]
                for s in report['suites'] for c in s.checks]
        return ['suite', 'check', 'passed', 'trials', 'failures', 'worst'], rows
