from swarmq.cli import run

run()
