import csv
import io
import logging
import sys
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from coherence.exceptions import EXIT_OK, EXIT_USAGE, CoherenceError
from coherence.forms import RunConfigForm
from coherence.serialization import dumps, to_jsonable

logger = logging.getLogger(__name__)


class CoherenceCommand(BaseCommand):
    """Shared options, config validation, error mapping and output for cohlab commands.

    Subclasses implement `run(config, **options)` and return the report; library
    errors become a CommandError carrying the exit code of their class.
    """

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(EXIT_USAGE, f'{parser.prog}: error: {message}\n')
            raise CommandError(f'Error: {message}', returncode=EXIT_USAGE)

        parser.error = error
        return parser

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='random seed (default COHLAB_SEED or 0)')
        parser.add_argument('--tol', type=float, help='numerical tolerance (default COHLAB_TOL or 1e-9)')
        parser.add_argument('--shots', type=int, help='shots per measurement (default COHLAB_SHOTS or 10000)')
        parser.add_argument('--alpha', type=float, help='significance level (default COHLAB_ALPHA or 1e-3)')
        parser.add_argument('--format', choices=['json', 'csv'], help='output format (default COHLAB_FORMAT or json)')
        parser.add_argument('--out', help='write the report to this file instead of stdout')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        form = RunConfigForm.from_options(options)
        if not form.is_valid():
            problems = '; '.join(f'{field}: {" ".join(errors)}' for field, errors in form.errors.items())
            raise CommandError(f'invalid options: {problems}', returncode=EXIT_USAGE)
        config = form.to_config()
        logger.debug('running %s with %s', type(self).__module__, config)
        try:
            report = self.run(config, **options)
        except CommandError:
            raise
        except CoherenceError as exc:
            raise CommandError(f'{type(exc).__name__}: {exc}', returncode=exc.exit_code) from exc
        except ValueError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE) from exc
        self.emit(report, config)
        code = self.exit_code(report)
        if code != EXIT_OK:
            raise CommandError(self.failure_message(report), returncode=code)

    def run(self, config, **options):
        raise NotImplementedError('subclasses of CoherenceCommand must provide a run() method')

    def exit_code(self, report):
        return EXIT_OK

    def failure_message(self, report):
        return 'command failed'

    def csv_rows(self, report):
        """Header and rows for --format csv; scalar fields as key,value pairs by default."""
        data = to_jsonable(report)
        return ['key', 'value'], [[k, v] for k, v in data.items() if not isinstance(v, (dict, list))]

    def render(self, report, config):
        if config.format == 'json':
            return dumps(report)
        header, rows = self.csv_rows(report)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
        return buffer.getvalue().rstrip('\n')

    def emit(self, report, config):
        text = self.render(report, config)
        if config.out:
            try:
                Path(config.out).write_text(text + '\n', encoding='utf-8')
            except OSError as exc:
                raise CommandError(f'cannot write {config.out}: {exc.strerror or exc}', returncode=EXIT_USAGE)
            logger.info('wrote %s', config.out)
        else:
            self.stdout.write(text)
