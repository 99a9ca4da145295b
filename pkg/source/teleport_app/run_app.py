# Installs the requirements and runs app.py with source/ on PYTHONPATH.
#
#   python run_app.py figures --out out/
#
# Every argument after the launcher options is passed through to app.py.

import os
import argparse
import subprocess
import sys
from pathlib import Path

default_out = os.environ.get("CATPORT_OUT", "./out")
default_tail = os.environ.get("CATPORT_TAIL", "1e-12")

parser = argparse.ArgumentParser(add_help=False)
parser.add_argument("--python", default=sys.executable, help="interpreter used to install requirements and run the app")
parser.add_argument("--skip-install", action="store_true")
args, app_args = parser.parse_known_args()

SCRIPT_DIR = os.path.dirname(os.path.realpath(__file__))
ROOT_DIR = Path(SCRIPT_DIR).resolve().parents[1]
EXTRA_PYTHON_PATHS = [str(Path(SCRIPT_DIR).resolve().parents[0])]

os.environ["PYTHONPATH"] = os.pathsep.join(EXTRA_PYTHON_PATHS + [os.environ.get("PYTHONPATH", "")])
os.environ["CATPORT_OUT"] = default_out
os.environ["CATPORT_TAIL"] = default_tail

REQ_FILE = ROOT_DIR.joinpath("requirements.txt")
if not args.skip_install:
    subprocess.run([args.python, "-m", "pip", "install", "-r", str(REQ_FILE)])
result = subprocess.run(
    [args.python, os.path.join(SCRIPT_DIR, "app.py")] + app_args,
    stderr=subprocess.STDOUT,
)
sys.exit(result.returncode)
