# sparsetrig/__main__.py

"""
__main__.py

Entry point for python -m sparsetrig invocation.
"""

import sys

from sparsetrig.main import main

sys.exit(main())

# U S A G I
# python -m sparsetrig sweep --dim 100 --samples 40 --mrange 1:40 --alg omp,bp
