from typing import Generic, Self, TypeVar

from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from distractipy.configs.config_template import (
    AdaBoostConfig,
    ArmConfig,
    EyeConfig,
    FusionConfig,
    GeneratorConfig,
    HmmConfig,
    SessionConfig,
    SvmConfig,
)
from distractipy.configs.environment_type import EnvironmentType

"""

Priority :
            1. constructor arguments (a config file loaded by the CLI)
            2. os level environment variable
            3. .env file
            4. class field value
"""
R = TypeVar("R")  # Runtime Config


class BaseConfig(BaseSettings, Generic[R]):
    """Configuration of the distraction pipeline.

    Settings are loaded from these sources, highest priority first:

    1. Constructor arguments (the CLI passes the contents of ``--config`` here)
    2. OS-level environment variables, nested with ``__`` (``HMM__STATE_COUNT=12``)
    3. The ``.env`` file
    4. Default field values

    A global instance is set once at start-up and read by every module that is not
    handed an explicit config section.

    Attributes:
        SESSION (SessionConfig): On-disk session format
        GENERATOR (GeneratorConfig): Synthetic session generator
        ARM (ArmConfig): Arm position module
        EYE (EyeConfig): Eye behavior module
        ADABOOST (AdaBoostConfig): Real AdaBoost engine
        SVM (SvmConfig): SMO-trained RBF SVM
        HMM (HmmConfig): Gaussian HMMs
        FUSION (FusionConfig): Feature fusion and classifier paths
        ENVIRONMENT (EnvironmentType): Runtime environment, decides the log level

    Examples:
        >>> from distractipy.configs.base_config import BaseConfig
        >>>
        >>> config = BaseConfig(HMM={"STATE_COUNT": 12})
        >>> BaseConfig.set_global(config)
        >>> BaseConfig.global_config().HMM.STATE_COUNT
        12
    """

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file=".env",
        extra="ignore",
        env_nested_delimiter="__",
        env_ignore_empty=True,
    )

    __global_config: Self | None = None

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Customize the settings sources priority order.

        Args:
            settings_cls: The settings class
            init_settings: Settings from initialization values
            env_settings: Settings from environment variables
            dotenv_settings: Settings from .env file
            file_secret_settings: Settings from secret files (unused)

        Returns:
            A tuple of configuration sources in priority order
        """
        return (
            init_settings,
            env_settings,
            dotenv_settings,
        )

    SESSION: SessionConfig = SessionConfig()
    GENERATOR: GeneratorConfig = GeneratorConfig()
    ARM: ArmConfig = ArmConfig()
    EYE: EyeConfig = EyeConfig()
    ADABOOST: AdaBoostConfig = AdaBoostConfig()
    SVM: SvmConfig = SvmConfig()
    HMM: HmmConfig = HmmConfig()
    FUSION: FusionConfig = FusionConfig()
    ENVIRONMENT: EnvironmentType = EnvironmentType.LOCAL

    def customize(self) -> None:
        """Customize configuration after loading.

        Subclasses may override this to derive settings from one another.
        """

    @classmethod
    def global_config(cls) -> Self:
        """Retrieves the global configuration instance.

        Returns:
            Self: The global configuration instance.

        Raises:
            AssertionError: If the global config hasn't been set with
                BaseConfig.set_global()
        """
        config_not_set_error = "You should set global configs with BaseConfig.set_global(MyConfig())"
        if cls.__global_config is None:
            raise AssertionError(config_not_set_error)
        return cls.__global_config  # type: ignore[no-any-return]

    @classmethod
    def set_global(cls, config: R) -> None:
        """Sets the global configuration instance.

        Args:
            config (R): The configuration instance to use globally.
        """
        if hasattr(config, "customize") and callable(config.customize):
            config.customize()
        cls.__global_config = config
