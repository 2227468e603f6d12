import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from cli.config import CliConfig, parse_bool, read_config_file
from governance.exceptions import ParameterError


def blank_options(**values):
    options = {key: None for key in (
        'window', 'stride', 'k', 'seed', 'measures', 'distance', 'include_inactive', 'weight_source',
        'normalize', 'workers', 'lenient', 'votes', 'balances', 'proposals', 'offchain_export', 'onchain_export',
        'ballots', 'out', 'format', 'config',
    )}
    options['verbosity'] = 1
    options.update(values)
    return options


class ConfigFileTests(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = Path(tmp.name)

    def write(self, text):
        path = self.dir / 'vbe.env'
        path.write_text(text)
        return path

    def test_values_are_typed(self):
        values = read_config_file(self.write("window=5\nInclude-Inactive=no\nmeasures=shannon,renyi:2\n"))
        self.assertEqual(values, {'window': 5, 'include_inactive': False, 'measures': 'shannon,renyi:2'})

    def test_unknown_key(self):
        with self.assertRaises(ParameterError):
            read_config_file(self.write("window=5\ncolour=blue\n"))

    def test_bad_integer(self):
        with self.assertRaises(ParameterError):
            read_config_file(self.write("k=three\n"))

    def test_missing_file(self):
        with self.assertRaises(ParameterError):
            read_config_file(self.dir / 'absent.env')

    def test_flags_override_file(self):
        path = self.write("window=5\nstride=5\nformat=csv\nvotes=a.csv\n")
        config = CliConfig.resolve('compute', blank_options(config=str(path), window=2))
        self.assertEqual(config.overrides, {'window': 2, 'stride': 5})
        self.assertEqual(config.fmt, 'csv')
        self.assertEqual(config.votes, Path('a.csv'))
        self.assertEqual(config.pipeline_config().window.length, 2)


class CliConfigTests(SimpleTestCase):

    def test_defaults(self):
        config = CliConfig.resolve('compute', blank_options())
        self.assertEqual(config.fmt, 'json')
        self.assertIsNone(config.out)
        self.assertFalse(config.lenient)
        self.assertEqual(config.pipeline_config().clustering.k, 3)

    def test_require_lists_missing_flags(self):
        config = CliConfig.resolve('compute', blank_options(votes='v.csv'))
        with self.assertRaisesMessage(ParameterError, '--balances, --proposals'):
            config.require('votes', 'balances', 'proposals')

    def test_parse_bool(self):
        self.assertTrue(parse_bool('lenient', 'Yes'))
        self.assertFalse(parse_bool('lenient', '0'))
        with self.assertRaises(ParameterError):
            parse_bool('lenient', 'maybe')

    def test_export_paths(self):
        config = CliConfig.resolve('compute', blank_options(onchain_export='tally.json'))
        self.assertEqual(config.onchain_export, Path('tally.json'))
        self.assertIsNone(config.offchain_export)
        with self.assertRaisesMessage(ParameterError, '--offchain-export'):
            config.require('offchain_export')


class ProjectSettingsTests(SimpleTestCase):

    def test_nothing_is_persisted(self):
        # an empty DATABASES is filled in with the dummy backend on first use
        engine = settings.DATABASES.get('default', {}).get('ENGINE', 'django.db.backends.dummy')
        self.assertEqual(engine, 'django.db.backends.dummy')
        self.assertFalse([app for app in settings.INSTALLED_APPS if app.startswith('django.contrib')])
