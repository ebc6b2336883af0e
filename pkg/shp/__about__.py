"""Causal structure discovery from binned event sequences.

Structural Hawkes processes extend the discrete-time Hawkes process with
instantaneous effects: an event type may excite another type within the same
time bin, not only in later bins. Allowing this makes the causal direction
identifiable even when the recording resolution is too coarse for temporal
precedence to reveal it.

The package fits such models with a minorization-maximization estimator,
searches the space of DAGs with an l0-penalized hill climb, and ships a
simulator and experiment harness to check recovery empirically.
"""
__title__ = 'Structural Hawkes'
__package_name__ = 'structural-hawkes'
__author__ = 'Structural Hawkes developers'
__description__ = ' '.join(
    '''
Learn causal DAGs among event types from binned event sequences with
structural Hawkes processes.
'''.strip().split()
)
__email__ = 'dev@structural-hawkes.invalid'
__version__ = '0.3.0'
__license__ = 'BSD'
__copyright__ = 'Copyright 2024 Structural Hawkes developers'
__url__ = 'https://github.com/structural-hawkes/structural-hawkes'
