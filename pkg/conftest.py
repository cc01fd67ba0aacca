"""
Root conftest for pytest.
Sets environment variables before the lab settings are loaded.
"""
import os
import tempfile

os.environ.setdefault('TRICAM_LOG_DIR', '')
os.environ.setdefault('TRICAM_OUT', os.path.join(tempfile.gettempdir(), 'tricam_test_runs'))
