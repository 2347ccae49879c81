import click

# Set up console logging from package file
# This configures the root logger which is inherited
# by all modules/submodules
from importlib.resources import files
import logging, logging.config
logging.config.fileConfig(str(files(__package__ or 'synthesis_tools').joinpath("logging.conf")),
                          disable_existing_loggers=False)

logger = logging.getLogger(__name__)

import synthesis_tools
import synthesis_tools.cli.gen as gen
import synthesis_tools.cli.train as train
import synthesis_tools.cli.eval as eval_
import synthesis_tools.cli.verify as verify
import synthesis_tools.cli.export_tptp as export_tptp
import synthesis_tools.cli.stats as stats

epilog = """See README.md for extended documentation.

Software licensed under GNU General Public License version 3."""

@click.group(epilog=epilog)
@click.version_option(version=synthesis_tools.__version__)
def main():
    """synthesis_tools: self-learned synthesis of combinators and Diophantine equations

    Programs are synthesized top-down by Monte Carlo tree search guided by a
    tree neural network. The network learns from the searches' own successes
    over generations of attempts on randomly generated problems. Two tasks
    are provided: SK-combinators matching a target behaviour on three
    variables, and polynomials defining a target subset of [0, 15] as a
    Diophantine set over Z/16Z.
    """
    pass

main.add_command(gen.run)
main.add_command(train.run)
main.add_command(eval_.run)
main.add_command(verify.run)
main.add_command(export_tptp.run)
main.add_command(stats.run)

if __name__ == '__main__':
    main()
