import os
import shutil
import tempfile
from contextlib import contextmanager

from lqg_feedback.cli import main


@contextmanager
def scratch_dir():
    path = tempfile.mkdtemp(prefix='lqg-debug-')
    try:
        yield path
    finally:
        # shutil.rmtree(path)
        print('Output kept in {0}'.format(path))


if __name__ == '__main__':
    with scratch_dir() as path:
        main(['solve', '--k', '2', '--a', '1.4142135623730951', '--verbose',
              '--out', os.path.join(path, 'solve.csv')])
        main(['simulate', '--k', '2', '--a', '1.4142135623730951', '--n', '60',
              '--trials', '200', '--grid-fraction', '0.8', '--verbose',
              '--out', os.path.join(path, 'simulate.csv')])
        print('Debug finished.')
