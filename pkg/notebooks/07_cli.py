"""
Command line
============

The same runs from the shell.  Each subcommand reads a line-oriented config
and writes CSV files; ``--set section.key=value`` overrides single keys.
"""

# %%
import os
import subprocess
import sys
import tempfile

here = os.path.dirname(os.path.abspath(__file__))
cfg = os.path.join(here, "..", "configs", "standard.cfg")
out = tempfile.mkdtemp()


def bdls(*args):
    cmd = [sys.executable, "-m", "bdls.cli", *args]
    done = subprocess.run(cmd, capture_output=True, text=True)
    print("$ bdls", " ".join(args), "->", done.returncode)
    # the resolved configuration is echoed first; keep the summary lines
    text = done.stdout.strip() or done.stderr.strip()
    print("\n".join(text.splitlines()[-6:]))
    return done.returncode


# %%
bdls("bd-run", "--config", cfg, "--out", out)
bdls("ls-run", "--config", cfg, "--out", out)
bdls("qssa", "--config", cfg, "--out", out, "--u", "1.0", "--n", "5")
bdls("check-lemma", "--r", "0.5", "--delta", "0.5")

# %%
# a malformed value is a configuration error (exit 2)
bdls("bd-run", "--config", cfg, "--set", "rates.r_a=oops")
print(sorted(os.listdir(out)))
