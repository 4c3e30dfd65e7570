from g2torus.cli.commands import algebra, ellipticity, lattice, report, solve, tdual, verify
from g2torus.cli.routing import CommandRouter

cli_router = CommandRouter()

# Include all command routers
cli_router.include_router(algebra.router)
cli_router.include_router(ellipticity.router)
cli_router.include_router(solve.router)
cli_router.include_router(verify.router)
cli_router.include_router(tdual.router)
cli_router.include_router(lattice.router)
cli_router.include_router(report.router)
