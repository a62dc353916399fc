from cx_Freeze import setup, Executable
import os

# Console application: enumeration output goes to stdout
exe = Executable(
    script=os.path.join("src", "main.py"),
    target_name="cdcl-wme",
    base=None,
)

options = {
    'build_exe': {
        'include_files': [
            (os.path.join(os.path.dirname(__file__), 'src', 'logging.conf'), 'logging.conf')
        ],
        'packages': ['numpy', 'scipy'],
        'excludes': ['torch', 'tensorflow'],
    },
}

setup(
    name="cdcl-wme",
    version="0.1",
    description="CDCL-based weighted model enumeration: all models, threshold and top-k over weighted CNF.",
    options=options,
    executables=[exe]
)
