# Test collection wiring: configure Django before test modules import it.
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ConvPerfModel.settings.local')
django.setup()
