APP_NAME = 'PredictiveContextPrior'
APP_VERSION = '0.1.0'

LOG_ROTATE_MAX_BYTES = 10 ** 6
LOG_ROTATE_BACKUP_COUNT = 5

LOG_FORMAT = (
    '%(asctime)s - [%(levelname)s] - %(run)s - %(name)s.%(funcName)s: '
    '%(message)s'
)
CONSOLE_FORMAT = '[%(levelname)s] %(message)s'
NO_RUN_TAG = '-'
DT_FORMAT = '%d.%m.%Y %H:%M:%S'

RED = '\033[31m'
GREEN = '\033[32m'
YELLOW = '\033[33m'
BLUE = '\033[34m'
RESET = '\033[0m'

DEFAULT_MAXLEN = 220
UNHANDLED = object()

# Коды завершения CLI
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# Архитектура сетей
DEFAULT_COND_DIM = 512
DEFAULT_HIDDEN = 512
DEFAULT_IMPLICIT_DEPTH = 8
DEFAULT_SKIP_LAYER = 4
DEFAULT_QUERY_DEPTH = 8
DEFAULT_ENCODER_WIDTHS = (64, 128)
QUERY_HEAD_INIT_SCALE = 0.01

# Оптимизация
DEFAULT_LR = 1e-4
DEFAULT_BETAS = (0.9, 0.999)
DEFAULT_EPS = 1e-8
GRAD_NORM_EPS = 1e-12

# Сэмплирование запросов
DEFAULT_PER_POINT = 40
DEFAULT_K_SIGMA = 50
DEFAULT_QUERIES_PER_REGION = 2000
DEFAULT_GRID = 6
SIGMA_MODES = ('variance', 'stddev')
LOSS_MODES = ('squared', 'plain')
NORMALIZE_MODES = ('full', 'center', 'scale', 'none')

DEFAULT_EPOCHS = 100
DEFAULT_STEPS = 1000
DEFAULT_LOG_EVERY = 50

# Меш
DEFAULT_MC_RES = 128
FINE_MC_RES = 512
DEFAULT_BOUNDS_PADDING = 0.1
DEFAULT_CHUNK_SIZE = 32768
MESH_FLOAT_FORMAT = '%.9g'

# Метрики
DEFAULT_SAMPLE_COUNT = 10_000
DEFAULT_FSCORE_THRESHOLD = 0.002
SCENE_FSCORE_THRESHOLD = 0.025
SCENE_DENSITIES = (20.0, 100.0, 500.0, 1000.0)

# Формат чекпоинта
CHECKPOINT_MAGIC = b'PCPR'
CHECKPOINT_VERSION = 1

# Именованные потоки случайности
RNG_STREAMS = (
    'init',
    'sampling',
    'selection',
    'shuffle',
    'metrics',
    'demo',
)

# Проверка градиентов
FD_STEP = 1e-4
FIRST_ORDER_TOLERANCE = 1e-4
DOUBLE_BACKPROP_TOLERANCE = 1e-3

# 2D демонстрация
DEMO_CIRCLE_POINTS = 200
DEMO_CIRCLE_RADIUS = 0.5
DEMO_SQUARE_POINTS = 200
DEMO_SQUARE_HALF = 0.35
DEMO_TOLERANCE = 0.02
DEMO_PASS_FRACTION = 0.95
DEMO_MAX_CONTOUR_CHAMFER = 0.02
DEMO_TABLE_QUERIES = 500
DEMO_CONTOUR_RES = 128

PLOT_FIGSIZE = (6, 4)
