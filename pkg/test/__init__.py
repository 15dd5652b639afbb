"""
dualcast Test Package
"""
