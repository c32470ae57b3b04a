"""
qisometry tests package.
"""
