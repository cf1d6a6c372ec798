"""Static knowledge about Java platform packages.

Used only for name resolution: which simple names live in ``java.lang``,
which types a wildcard import of a platform package brings into scope, and
the return types of common fluent calls so that chained receivers such as
``list.stream().map(...)`` can be typed without a compiler.
"""

from __future__ import annotations

JAVA_LANG_TYPES = frozenset("""
Object String StringBuilder StringBuffer CharSequence Integer Long Double Float Short Byte
Character Boolean Number Math StrictMath System Runtime Thread ThreadLocal Runnable Iterable
Comparable Cloneable AutoCloseable Enum Record Class ClassLoader Void Process ProcessBuilder
Throwable Exception RuntimeException Error NullPointerException ArithmeticException
ArrayIndexOutOfBoundsException IndexOutOfBoundsException StringIndexOutOfBoundsException
ClassCastException IllegalArgumentException IllegalStateException NumberFormatException
UnsupportedOperationException InterruptedException CloneNotSupportedException
ClassNotFoundException NegativeArraySizeException SecurityException StackOverflowError
OutOfMemoryError AssertionError ExceptionInInitializerError ReflectiveOperationException
Override Deprecated SuppressWarnings FunctionalInterface SafeVarargs
""".split())

_PACKAGES: dict[str, str] = {
    "java.util": """List ArrayList LinkedList Set HashSet LinkedHashSet TreeSet SortedSet NavigableSet
        Map HashMap LinkedHashMap TreeMap SortedMap NavigableMap Collection Collections Arrays
        Iterator ListIterator Queue Deque ArrayDeque PriorityQueue Stack Vector Hashtable
        Comparator Optional OptionalInt OptionalLong OptionalDouble Objects Random Scanner
        Locale ResourceBundle ListResourceBundle PropertyResourceBundle Properties Date Calendar
        GregorianCalendar UUID StringJoiner Formatter BitSet EnumMap EnumSet Timer TimerTask
        NoSuchElementException ConcurrentModificationException""",
    "java.util.function": """Function BiFunction Consumer BiConsumer Supplier Predicate BiPredicate
        UnaryOperator BinaryOperator IntFunction LongFunction DoubleFunction IntPredicate
        LongPredicate DoublePredicate IntConsumer LongConsumer DoubleConsumer IntSupplier
        LongSupplier DoubleSupplier BooleanSupplier IntUnaryOperator LongUnaryOperator
        DoubleUnaryOperator IntBinaryOperator LongBinaryOperator DoubleBinaryOperator
        ToIntFunction ToLongFunction ToDoubleFunction ToIntBiFunction ToLongBiFunction
        ToDoubleBiFunction IntToLongFunction IntToDoubleFunction LongToIntFunction
        LongToDoubleFunction DoubleToIntFunction DoubleToLongFunction ObjIntConsumer
        ObjLongConsumer ObjDoubleConsumer""",
    "java.util.stream": "Stream IntStream LongStream DoubleStream Collectors Collector StreamSupport",
    "java.util.concurrent": """ExecutorService Executors Executor Callable Future CompletableFuture
        ScheduledExecutorService ThreadPoolExecutor ConcurrentHashMap ConcurrentMap
        CopyOnWriteArrayList CopyOnWriteArraySet CyclicBarrier CountDownLatch Semaphore
        BlockingQueue LinkedBlockingQueue ArrayBlockingQueue ForkJoinPool RecursiveTask
        RecursiveAction ForkJoinTask TimeUnit ExecutionException TimeoutException
        ConcurrentLinkedQueue ThreadLocalRandom""",
    "java.util.concurrent.atomic": "AtomicInteger AtomicLong AtomicBoolean AtomicReference",
    "java.util.concurrent.locks": "Lock ReentrantLock ReadWriteLock ReentrantReadWriteLock Condition",
    "java.util.regex": "Pattern Matcher PatternSyntaxException MatchResult",
    "java.io": """File FileReader FileWriter BufferedReader BufferedWriter FileInputStream
        FileOutputStream ObjectInputStream ObjectOutputStream PrintWriter PrintStream InputStream
        OutputStream InputStreamReader OutputStreamWriter Reader Writer Serializable Closeable
        Console IOException FileNotFoundException UncheckedIOException EOFException
        ByteArrayInputStream ByteArrayOutputStream StringReader StringWriter DataInputStream
        DataOutputStream""",
    "java.nio.file": "Path Paths Files FileSystem FileSystems StandardOpenOption DirectoryStream NoSuchFileException",
    "java.nio.file.attribute": "BasicFileAttributes FileTime PosixFilePermission",
    "java.time": """LocalDate LocalTime LocalDateTime Instant Period Duration ZonedDateTime ZoneId
        ZoneOffset OffsetDateTime Clock DayOfWeek Month Year YearMonth""",
    "java.time.format": "DateTimeFormatter FormatStyle DateTimeParseException",
    "java.time.temporal": "ChronoUnit TemporalUnit Temporal TemporalAdjusters ChronoField",
    "java.sql": """Connection DriverManager Driver Statement PreparedStatement CallableStatement
        ResultSet ResultSetMetaData SQLException Timestamp Types""",
    "javax.sql": "DataSource",
    "java.text": "SimpleDateFormat NumberFormat DecimalFormat MessageFormat DateFormat",
    "java.math": "BigDecimal BigInteger",
}

_EE_PACKAGES: dict[str, str] = {
    "persistence": """Entity Table Id Column GeneratedValue GenerationType OneToMany ManyToOne
        ManyToMany OneToOne JoinColumn JoinTable Embeddable Embedded MappedSuperclass Transient
        Version NamedQuery NamedQueries EntityManager EntityManagerFactory EntityTransaction
        Persistence PersistenceContext Query TypedQuery LockModeType""",
    "ejb": """Stateless Stateful Singleton Startup Local Remote EJB Asynchronous Schedule Timeout
        Timer TimerService TimerConfig ScheduleExpression SessionContext MessageDriven
        ActivationConfigProperty TransactionAttribute TransactionAttributeType""",
    "interceptor": "Interceptor Interceptors AroundInvoke InvocationContext InterceptorBinding",
    "jms": """ConnectionFactory Connection Session MessageProducer MessageConsumer Message
        TextMessage MessageListener Queue Topic Destination JMSContext JMSException JMSProducer
        JMSConsumer""",
    "jws": "WebService WebMethod WebParam WebResult",
    "xml.ws": "Service WebServiceRef Endpoint",
    "xml.bind": """JAXBContext Marshaller Unmarshaller JAXBException""",
    "xml.bind.annotation": "XmlRootElement XmlElement XmlAttribute XmlType XmlAccessorType XmlAccessType XmlTransient",
    "servlet": """Servlet ServletException ServletConfig ServletContext Filter FilterChain
        FilterConfig ServletRequest ServletResponse ServletContextListener""",
    "servlet.http": "HttpServlet HttpServletRequest HttpServletResponse HttpSession Cookie",
    "servlet.annotation": "WebServlet WebFilter WebListener WebInitParam",
    "ws.rs": "GET POST PUT DELETE Path PathParam QueryParam Produces Consumes ApplicationPath",
    "ws.rs.core": "Response MediaType Application Context UriInfo",
    "ws.rs.client": "Client ClientBuilder WebTarget",
    "websocket": """ClientEndpoint OnOpen OnClose OnMessage OnError Session Encoder Decoder
        EncodeException DecodeException EndpointConfig Endpoint""",
    "websocket.server": "ServerEndpoint ServerEndpointConfig",
    "faces.bean": "ManagedBean SessionScoped RequestScoped ViewScoped",
    "faces.context": "FacesContext ExternalContext",
    "faces.application": "FacesMessage",
    "faces.component": "UIComponent",
    "inject": "Inject Named Qualifier Singleton Provider",
    "enterprise.context": "ApplicationScoped RequestScoped SessionScoped Dependent ConversationScoped",
    "enterprise.inject": "Produces Disposes Stereotype Alternative Instance Default Any",
    "enterprise.event": "Event Observes",
    "batch.api": "AbstractBatchlet Batchlet BatchProperty",
    "batch.api.chunk": "ItemReader ItemWriter ItemProcessor AbstractItemReader AbstractItemWriter",
    "batch.runtime": "BatchRuntime JobExecution BatchStatus",
    "batch.operations": "JobOperator",
    "annotation": "PostConstruct PreDestroy Resource",
}


def _build_registry() -> dict[str, frozenset[str]]:
    reg = {pkg: frozenset(names.split()) for pkg, names in _PACKAGES.items()}
    for suffix, names in _EE_PACKAGES.items():
        for root in ("javax", "jakarta"):
            reg[f"{root}.{suffix}"] = frozenset(names.split())
    return reg


PACKAGE_TYPES: dict[str, frozenset[str]] = _build_registry()

STATIC_FIELD_TYPES = {
    "java.lang.System.out": "java.io.PrintStream",
    "java.lang.System.err": "java.io.PrintStream",
    "java.lang.System.in": "java.io.InputStream",
}

_COLLECTIONS = [f"java.util.{n}" for n in (
    "List ArrayList LinkedList Set HashSet LinkedHashSet TreeSet SortedSet Collection Queue Deque "
    "ArrayDeque PriorityQueue Vector Stack").split()] + [
    "java.util.concurrent.CopyOnWriteArrayList", "java.util.concurrent.CopyOnWriteArraySet"]
_STREAM = "java.util.stream.Stream"
_PRIMITIVE_STREAMS = {
    "java.util.stream.IntStream": "java.util.OptionalInt",
    "java.util.stream.LongStream": "java.util.OptionalLong",
    "java.util.stream.DoubleStream": "java.util.OptionalDouble",
}


def _build_returns() -> dict[tuple[str, str], str]:
    r: dict[tuple[str, str], str] = {}
    for c in _COLLECTIONS:
        r[(c, "stream")] = _STREAM
        r[(c, "parallelStream")] = _STREAM
        r[(c, "iterator")] = "java.util.Iterator"
    r[("java.util.Arrays", "stream")] = _STREAM
    r[("java.util.Arrays", "asList")] = "java.util.List"
    for m in "map filter peek sorted distinct limit skip flatMap parallel sequential of generate iterate concat empty".split():
        r[(_STREAM, m)] = _STREAM
    for m in "findFirst findAny min max reduce".split():
        r[(_STREAM, m)] = "java.util.Optional"
    for src, target in (("mapToInt", "IntStream"), ("flatMapToInt", "IntStream"), ("mapToLong", "LongStream"),
                        ("flatMapToLong", "LongStream"), ("mapToDouble", "DoubleStream"),
                        ("flatMapToDouble", "DoubleStream")):
        r[(_STREAM, src)] = f"java.util.stream.{target}"
    for ps, opt in _PRIMITIVE_STREAMS.items():
        for m in "map filter peek sorted distinct limit skip flatMap parallel sequential of range rangeClosed".split():
            r[(ps, m)] = ps
        for m in "mapToObj boxed".split():
            r[(ps, m)] = _STREAM
        for m in "findFirst findAny min max".split():
            r[(ps, m)] = opt
        r[(ps, "average")] = "java.util.OptionalDouble"
        r[(ps, "asDoubleStream")] = "java.util.stream.DoubleStream"
    for m in "of ofNullable empty map filter flatMap or".split():
        r[("java.util.Optional", m)] = "java.util.Optional"
    s = "java.lang.String"
    for m in "substring trim strip toUpperCase toLowerCase replace replaceAll concat format valueOf join repeat intern".split():
        r[(s, m)] = s
    for sb in ("java.lang.StringBuilder", "java.lang.StringBuffer"):
        for m in "append insert reverse delete deleteCharAt replace".split():
            r[(sb, m)] = sb
    r[("java.util.regex.Pattern", "compile")] = "java.util.regex.Pattern"
    r[("java.util.regex.Pattern", "matcher")] = "java.util.regex.Matcher"
    r[("java.sql.DriverManager", "getConnection")] = "java.sql.Connection"
    r[("javax.sql.DataSource", "getConnection")] = "java.sql.Connection"
    r[("java.sql.Connection", "createStatement")] = "java.sql.Statement"
    r[("java.sql.Connection", "prepareStatement")] = "java.sql.PreparedStatement"
    r[("java.sql.Connection", "prepareCall")] = "java.sql.CallableStatement"
    for st in ("java.sql.Statement", "java.sql.PreparedStatement", "java.sql.CallableStatement"):
        r[(st, "executeQuery")] = "java.sql.ResultSet"
    r[("java.nio.file.Paths", "get")] = "java.nio.file.Path"
    for m in "of resolve getParent getFileName toAbsolutePath normalize relativize getRoot resolveSibling".split():
        r[("java.nio.file.Path", m)] = "java.nio.file.Path"
    for m in "newFixedThreadPool newCachedThreadPool newSingleThreadExecutor newWorkStealingPool".split():
        r[("java.util.concurrent.Executors", m)] = "java.util.concurrent.ExecutorService"
    r[("java.util.concurrent.Executors", "newScheduledThreadPool")] = "java.util.concurrent.ScheduledExecutorService"
    r[("java.util.concurrent.ExecutorService", "submit")] = "java.util.concurrent.Future"
    for t in "LocalDate LocalTime LocalDateTime Instant ZonedDateTime OffsetDateTime Duration Period".split():
        for m in "now of parse from between ofDays ofHours ofMinutes ofSeconds ofMillis ofMonths ofYears ofEpochMilli ofEpochSecond".split():
            r[(f"java.time.{t}", m)] = f"java.time.{t}"
    r[("java.time.LocalDateTime", "toLocalDate")] = "java.time.LocalDate"
    r[("java.time.LocalDateTime", "toLocalTime")] = "java.time.LocalTime"
    r[("java.time.LocalDate", "atTime")] = "java.time.LocalDateTime"
    r[("java.time.LocalDate", "atStartOfDay")] = "java.time.LocalDateTime"
    r[("java.time.format.DateTimeFormatter", "ofPattern")] = "java.time.format.DateTimeFormatter"
    r[("java.time.ZoneId", "of")] = "java.time.ZoneId"
    r[("java.time.ZoneId", "systemDefault")] = "java.time.ZoneId"
    r[("java.util.Locale", "getDefault")] = "java.util.Locale"
    r[("java.util.Locale", "forLanguageTag")] = "java.util.Locale"
    r[("java.util.ResourceBundle", "getBundle")] = "java.util.ResourceBundle"
    for root in ("javax", "jakarta"):
        p = f"{root}.persistence"
        r[(f"{p}.Persistence", "createEntityManagerFactory")] = f"{p}.EntityManagerFactory"
        r[(f"{p}.EntityManagerFactory", "createEntityManager")] = f"{p}.EntityManager"
        r[(f"{p}.EntityManager", "getTransaction")] = f"{p}.EntityTransaction"
        r[(f"{p}.EntityManager", "createQuery")] = f"{p}.TypedQuery"
        r[(f"{p}.EntityManager", "createNamedQuery")] = f"{p}.TypedQuery"
        r[(f"{root}.servlet.http.HttpServletRequest", "getSession")] = f"{root}.servlet.http.HttpSession"
        r[(f"{root}.ws.rs.client.ClientBuilder", "newClient")] = f"{root}.ws.rs.client.Client"
        r[(f"{root}.ws.rs.client.Client", "target")] = f"{root}.ws.rs.client.WebTarget"
        r[(f"{root}.ws.rs.client.WebTarget", "path")] = f"{root}.ws.rs.client.WebTarget"
        r[(f"{root}.faces.context.FacesContext", "getCurrentInstance")] = f"{root}.faces.context.FacesContext"
        r[(f"{root}.xml.bind.JAXBContext", "newInstance")] = f"{root}.xml.bind.JAXBContext"
        r[(f"{root}.xml.bind.JAXBContext", "createMarshaller")] = f"{root}.xml.bind.Marshaller"
        r[(f"{root}.xml.bind.JAXBContext", "createUnmarshaller")] = f"{root}.xml.bind.Unmarshaller"
    return r


RETURN_TYPES: dict[tuple[str, str], str] = _build_returns()


def return_type(receiver: str, method: str) -> str | None:
    """Best-effort static return type of ``receiver.method(...)``."""
    hit = RETURN_TYPES.get((receiver, method))
    if hit is not None:
        return hit
    if method == "toString":
        return "java.lang.String"
    if receiver.startswith("java.time.") and method.startswith(("plus", "minus", "with")):
        return receiver
    return None
